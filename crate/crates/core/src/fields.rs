//! Continuum densities (finite sums of dyadic-ball indicators) and their
//! level-n discretizations.
//!
//! A density is sigma = sum_t coeff_t * 1_{B(c_t, 2^{j_t})}, where each ball
//! is the union of the (at most two) scale -j cells incident to its center.
//! Every integral against mu is then an exact rational, and discretization
//! averages sigma over the double triangle of incident scale-(n+1) cells.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::gasket::{
    cell_intersection_measure, pow3, unbounded_cell_exists, unbounded_member, Cell,
};
use crate::{Error, GasketLevel, Half, Result, Vertex};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CenterSpec {
    pub half: Half,
    pub a: u64,
    pub b: u64,
    /// Lattice level of the coordinates: the planar point is
    /// 2^{-level} (a + b/2, b sqrt3/2), mirrored for the Minus half.
    pub level: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermSpec {
    /// Nonnegative rational as a decimal string ("3", "1.5", "2/3").
    pub coeff: String,
    pub center: CenterSpec,
    pub radius_log2: i32,
}

/// On-disk density description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensitySpec {
    /// Declared bounding double triangle B(0, 2^bound_L).
    #[serde(rename = "bound_L")]
    pub bound_log2: u32,
    pub terms: Vec<TermSpec>,
}

/// Closed ball B(c, 2^j): the union of the scale -j cells incident to the
/// center, which must be a scale -j lattice point of the gasket.
#[derive(Clone, Debug)]
pub struct DyadicBall {
    pub radius_log2: i32,
    pub cells: Vec<Cell>,
}

impl DyadicBall {
    /// Center given in coordinates of 2^{-level} units.
    pub fn new(half: Half, a: u64, b: u64, level: i32, radius_log2: i32) -> Result<DyadicBall> {
        let scale = -radius_log2;
        // Rescale center coordinates to radius units (2^{-scale} = 2^j).
        let shift = level - scale;
        let (ca, cb) = if shift >= 0 {
            let m = 1u64 << shift;
            if a % m != 0 || b % m != 0 {
                return Err(Error::Density(format!(
                    "ball center ({a},{b}) at level {level} is not a lattice point at radius 2^{radius_log2}"
                )));
            }
            (a / m, b / m)
        } else {
            (a << -shift, b << -shift)
        };
        if !unbounded_member(ca, cb) {
            return Err(Error::Density(format!(
                "ball center ({a},{b}) at level {level} is not a gasket point"
            )));
        }

        let mut cells = Vec::with_capacity(2);
        if ca == 0 && cb == 0 {
            for h in [Half::Plus, Half::Minus] {
                cells.push(Cell { half: h, scale, a: 0, b: 0 });
            }
        } else {
            let mut push = |a: u64, b: u64| {
                if unbounded_cell_exists(a, b) {
                    cells.push(Cell { half, scale, a, b });
                }
            };
            push(ca, cb);
            if ca > 0 {
                push(ca - 1, cb);
            }
            if cb > 0 {
                push(ca, cb - 1);
            }
        }
        debug_assert!(!cells.is_empty());
        Ok(DyadicBall { radius_log2, cells })
    }

    pub fn measure(&self) -> BigRational {
        self.cells.iter().map(Cell::measure).fold(BigRational::zero(), |s, m| s + m)
    }

    pub fn contains(&self, v: Vertex, n: u32) -> bool {
        self.cells.iter().any(|c| c.contains_vertex(v, n))
    }

    /// Exact mu(cell ∩ ball).
    pub fn cell_intersection(&self, cell: &Cell) -> BigRational {
        self.cells
            .iter()
            .map(|b| cell_intersection_measure(cell, b))
            .fold(BigRational::zero(), |s, m| s + m)
    }

    /// Largest corner-coordinate sum over the ball's cells, in radius units.
    fn extent(&self) -> u64 {
        self.cells.iter().map(|c| c.a + c.b + 1).max().unwrap()
    }
}

/// Validated density: exact coefficients attached to dyadic balls.
#[derive(Clone, Debug)]
pub struct Density {
    pub bound_log2: u32,
    pub terms: Vec<(BigRational, DyadicBall)>,
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = |_| Error::Density(format!("cannot parse rational from {s:?}"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(bad)?;
        let d: BigInt = den.trim().parse().map_err(bad)?;
        if d.is_zero() {
            return Err(Error::Density(format!("zero denominator in {s:?}")));
        }
        Ok(BigRational::new(n, d))
    } else if let Some((int, frac)) = s.split_once('.') {
        let int = if int.is_empty() { "0" } else { int };
        let neg = int.starts_with('-');
        let i: BigInt = int.parse().map_err(bad)?;
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(Error::Density(format!("cannot parse rational from {s:?}")));
        }
        let f: BigInt = frac.parse().map_err(bad)?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigRational::new(f, den);
        let int_part = BigRational::from_integer(i);
        Ok(if neg { int_part - frac_part } else { int_part + frac_part })
    } else {
        let i: BigInt = s.parse().map_err(bad)?;
        Ok(BigRational::from_integer(i))
    }
}

impl Density {
    pub fn from_spec(spec: &DensitySpec) -> Result<Density> {
        let mut terms = Vec::with_capacity(spec.terms.len());
        for t in &spec.terms {
            let coeff = parse_rational(&t.coeff)?;
            if coeff.is_negative() {
                return Err(Error::Density(format!("negative coefficient {}", t.coeff)));
            }
            let ball =
                DyadicBall::new(t.center.half, t.center.a, t.center.b, t.center.level, t.radius_log2)?;
            Self::check_ball_inside(&ball, spec.bound_log2)?;
            terms.push((coeff, ball));
        }
        Ok(Density { bound_log2: spec.bound_log2, terms })
    }

    pub fn from_json(json: &str) -> Result<Density> {
        let spec: DensitySpec = serde_json::from_str(json)?;
        Density::from_spec(&spec)
    }

    fn check_ball_inside(ball: &DyadicBall, bound_log2: u32) -> Result<()> {
        // A cell of scale -j fits in the side-2^L triangle iff its corner sum
        // stays within 2^{L-j} radius units.
        let lim = bound_log2 as i64 - ball.radius_log2 as i64;
        let fits = lim >= 0 && lim < 64 && ball.extent() <= 1u64 << lim;
        if fits {
            Ok(())
        } else {
            Err(Error::Density("support exceeds domain".into()))
        }
    }

    /// Exact integral of sigma over the gasket.
    pub fn integral(&self) -> BigRational {
        self.terms
            .iter()
            .map(|(c, b)| c.clone() * b.measure())
            .fold(BigRational::zero(), |s, m| s + m)
    }

    /// Largest possible value (sum of all coefficients).
    pub fn sup_bound(&self) -> BigRational {
        self.terms.iter().map(|(c, _)| c.clone()).fold(BigRational::zero(), |s, m| s + m)
    }

    /// Pointwise value at a level-n vertex (closed-ball indicators).
    pub fn value_at(&self, v: Vertex, n: u32) -> BigRational {
        self.terms
            .iter()
            .filter(|(_, b)| b.contains(v, n))
            .map(|(c, _)| c.clone())
            .fold(BigRational::zero(), |s, m| s + m)
    }

    /// Exact average of sigma over the double triangle of scale-(n+1) cells
    /// at each vertex of g.
    pub fn discretize_exact(&self, g: &GasketLevel) -> Result<Vec<BigRational>> {
        for (_, ball) in &self.terms {
            Self::check_ball_inside(ball, g.domain_log2())?;
        }
        let scale = g.n() as i32 + 1;
        let cell_measure = pow3(-scale) / BigRational::from_integer(BigInt::from(2));
        let mut out = Vec::with_capacity(g.vertex_count());
        for &v in g.vertices() {
            let cells = g.double_triangle_cells(v, scale)?;
            let mut integral = BigRational::zero();
            for cell in &cells {
                for (coeff, ball) in &self.terms {
                    let m = ball.cell_intersection(cell);
                    if !m.is_zero() {
                        integral = integral + coeff.clone() * m;
                    }
                }
            }
            let total = cell_measure.clone() * BigRational::from_integer(BigInt::from(cells.len()));
            out.push(integral / total);
        }
        Ok(out)
    }
}

/// Ratio between the rescaled vertex sum delta_n^alpha * sum sigma_n and the
/// continuum integral of sigma: summing the double-triangle averages counts
/// every cell once, and there are 3^{n+1} cells per unit of measure at
/// scale n+1 against the delta_n^alpha = 3^{-n} rescaling.
pub const MASS_COUNT_RATIO: f64 = 3.0;

/// Per-vertex real density sigma_n.
#[derive(Clone, Debug)]
pub struct DensityField {
    pub n: u32,
    pub domain_log2: u32,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// delta_n^alpha * total. Every scale-(n+1) cell has exactly one level-n
    /// corner, so for densities supported away from the domain corners this
    /// converges to 3 * integral(sigma) (and is exact for cell-aligned
    /// densities, see MASS_COUNT_RATIO).
    pub fn rescaled_mass(&self) -> f64 {
        crate::alpha_scale(self.n) * self.total_mass()
    }
}

/// Per-vertex particle counts, floor of the exact average.
#[derive(Clone, Debug)]
pub struct ParticleField {
    pub n: u32,
    pub domain_log2: u32,
    pub counts: Vec<u64>,
}

impl ParticleField {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn rescaled_mass(&self) -> f64 {
        crate::alpha_scale(self.n) * self.total() as f64
    }
}

pub fn discretize(density: &Density, g: &GasketLevel) -> Result<DensityField> {
    let exact = density.discretize_exact(g)?;
    Ok(DensityField {
        n: g.n(),
        domain_log2: g.domain_log2(),
        values: exact.iter().map(|r| ToPrimitive::to_f64(r).unwrap()).collect(),
    })
}

pub fn discretize_floor(density: &Density, g: &GasketLevel) -> Result<ParticleField> {
    let exact = density.discretize_exact(g)?;
    Ok(ParticleField {
        n: g.n(),
        domain_log2: g.domain_log2(),
        counts: exact
            .iter()
            .map(|r| r.floor().to_integer().to_u64().expect("density out of range"))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_integer(BigInt::from(3)));
        assert_eq!(
            parse_rational("1.5").unwrap(),
            BigRational::new(BigInt::from(3), BigInt::from(2))
        );
        assert_eq!(
            parse_rational("2/3").unwrap(),
            BigRational::new(BigInt::from(2), BigInt::from(3))
        );
        assert_eq!(
            parse_rational("0.25").unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(4))
        );
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.x2").is_err());
    }

    #[test]
    fn unit_ball_at_origin() {
        let b = DyadicBall::new(Half::Plus, 0, 0, 0, 0).unwrap();
        assert_eq!(b.cells.len(), 2);
        assert_eq!(b.measure(), BigRational::from_integer(BigInt::from(1)));
    }

    #[test]
    fn ball_center_off_lattice() {
        // (1,0) at level 1 is the planar point (1/2, 0); radius 2 needs a
        // scale-(-1) lattice point.
        assert!(DyadicBall::new(Half::Plus, 1, 0, 1, 1).is_err());
    }

    #[test]
    fn ball_center_in_hole() {
        assert!(DyadicBall::new(Half::Plus, 3, 2, 0, 0).is_err());
    }

    #[test]
    fn support_must_fit_domain() {
        let spec = DensitySpec {
            bound_log2: 1,
            terms: vec![TermSpec {
                coeff: "1".into(),
                center: CenterSpec { half: Half::Plus, a: 2, b: 0, level: 0 },
                radius_log2: 0,
            }],
        };
        let err = Density::from_spec(&spec).unwrap_err();
        assert!(err.to_string().contains("support exceeds domain"));
    }
}
