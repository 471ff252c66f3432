//! Exact rational reference solutions for the two-scale ball density
//! 3^{L-l} on B(0, 2^l), solved over the domain B(0, 2^{L+1}).
//!
//! For this family the obstacle, its majorant, and the cluster B(0, 2^L)
//! have closed forms at a lattice of junction points along the axes. The
//! evaluators here are independent of the numeric solvers and serve as
//! their oracle.
//!
//! Scaling convention: these are continuum-normalized values. A level-n
//! discretized obstacle equals exactly 3/4 of them at junction points (the
//! limit generator is 3/4 of the rescaled graph Laplacians), so comparisons
//! multiply the discrete side by [`continuum_rescale`].

use num_rational::BigRational;

use crate::fields::{CenterSpec, DensitySpec, TermSpec};
use crate::harmonic::spow;
use crate::scalar::Scalar;
use crate::{Half, Vertex};

/// 4/3: multiply a level-n discretized obstacle by this to land on the
/// continuum-normalized closed forms (exact at junction points).
pub fn continuum_rescale() -> BigRational {
    BigRational::from_ratio(4, 3)
}

/// Closed-form data for the density 3^{L-l} 1_{B(0,2^l)} on B(0,2^{L+1}).
pub struct ExactObstacle {
    /// l: the source ball has radius 2^l.
    pub source_log2: u32,
    /// L: the predicted cluster is B(0, 2^L); the domain is B(0, 2^{L+1}).
    pub cluster_log2: u32,
}

impl ExactObstacle {
    pub fn new(source_log2: u32, cluster_log2: u32) -> ExactObstacle {
        assert!(cluster_log2 > source_log2);
        ExactObstacle { source_log2, cluster_log2 }
    }

    pub fn domain_log2(&self) -> u32 {
        self.cluster_log2 + 1
    }

    /// 3^{L-l}, the density value on the source ball.
    pub fn coefficient(&self) -> BigRational {
        spow(3, (self.cluster_log2 - self.source_log2) as i32)
    }

    pub fn density_spec(&self) -> DensitySpec {
        DensitySpec {
            bound_log2: self.domain_log2(),
            terms: vec![TermSpec {
                coeff: self.coefficient().to_string(),
                center: CenterSpec { half: Half::Plus, a: 0, b: 0, level: 0 },
                radius_log2: self.source_log2 as i32,
            }],
        }
    }

    /// Offset that glues the loaded profile on the source ball to the
    /// harmonic annulus piece: 4 * 5^l ((5/3)^{L-l+1} - 1).
    pub fn gluing_constant(&self) -> BigRational {
        let d = (self.cluster_log2 - self.source_log2 + 1) as i32;
        let four = BigRational::from_ratio(4, 1);
        four * spow::<BigRational>(5, self.source_log2 as i32)
            * (spow::<BigRational>(5, d) / spow::<BigRational>(3, d) - BigRational::one())
    }

    /// Constant value of the majorant on the cluster, 8/3 * 5^L; also the
    /// obstacle's maximum, attained at the outer cluster corners.
    pub fn cap(&self) -> BigRational {
        BigRational::from_ratio(8, 3) * spow::<BigRational>(5, self.cluster_log2 as i32)
    }

    /// Obstacle value on the source-ball boundary corners:
    /// 4/3 * 5^l (3^{L-l+1} - 1).
    pub fn source_boundary_value(&self) -> BigRational {
        self.axis_value(self.cluster_log2 - self.source_log2)
    }

    /// Axis junction x_j = (2^{L-j}, 0), valid for j = 0..=L-l; j = 0 is an
    /// outer cluster corner, j = L-l a source-ball corner.
    pub fn axis_point(&self, j: u32, n: u32) -> Vertex {
        assert!(j <= self.cluster_log2 - self.source_log2);
        Vertex::new(Half::Plus, 1u64 << (self.cluster_log2 - j + n), 0)
    }

    /// Obstacle value at the axis junction: 4/3 * 5^{L-j} (3^{j+1} - 1).
    pub fn axis_value(&self, j: u32) -> BigRational {
        assert!(j <= self.cluster_log2 - self.source_log2);
        BigRational::from_ratio(4, 3)
            * spow::<BigRational>(5, (self.cluster_log2 - j) as i32)
            * (spow::<BigRational>(3, j as i32 + 1) - BigRational::one())
    }

    /// Apex junction y_j = (2^{L-j}, 2^{L-j}), the top corner of the j-th
    /// chain triangle; valid for j = 1..=L-l.
    pub fn apex_point(&self, j: u32, n: u32) -> Vertex {
        assert!((1..=self.cluster_log2 - self.source_log2).contains(&j));
        let c = 1u64 << (self.cluster_log2 - j + n);
        Vertex::new(Half::Plus, c, c)
    }

    /// Obstacle value at the apex junction: 4/3 * 5^{L-j} (4 * 3^j - 2).
    pub fn apex_value(&self, j: u32) -> BigRational {
        assert!((1..=self.cluster_log2 - self.source_log2).contains(&j));
        BigRational::from_ratio(4, 3)
            * spow::<BigRational>(5, (self.cluster_log2 - j) as i32)
            * (BigRational::from_ratio(4, 1) * spow::<BigRational>(3, j as i32)
                - BigRational::from_ratio(2, 1))
    }

    fn family_range(&self, j: u32) {
        assert!(
            (1..self.cluster_log2 - self.source_log2).contains(&j),
            "dyadic edge families hold for 1 <= j <= L - l - 1"
        );
    }

    /// Dyadic point on the axis edge of chain triangle j, approaching the
    /// previous axis junction: (2^{L-j+1} - 2^{L-j-k}, 0). None when not a
    /// level-n lattice point.
    pub fn edge_x_point(&self, j: u32, k: u32, n: u32) -> Option<Vertex> {
        self.family_range(j);
        let e = self.cluster_log2 as i64 - j as i64 - k as i64 + n as i64;
        if e < 0 {
            return None;
        }
        let a = (1u64 << (self.cluster_log2 - j + 1 + n)) - (1u64 << e);
        Some(Vertex::new(Half::Plus, a, 0))
    }

    /// (3/5)^k 5^{L-j} (3^{j+1} - 9): the slowly decaying correction shared
    /// by all three edge families.
    fn slow_term(&self, j: u32, k: u32) -> BigRational {
        (spow::<BigRational>(3, j as i32 + 1) - BigRational::from_ratio(9, 1))
            * spow::<BigRational>(3, k as i32)
            * self.fast_scale(j, k)
    }

    /// (1/5)^k 5^{L-j}.
    fn fast_scale(&self, j: u32, k: u32) -> BigRational {
        spow::<BigRational>(5, (self.cluster_log2 - j) as i32 - k as i32)
    }

    pub fn edge_x_value(&self, j: u32, k: u32) -> BigRational {
        self.family_range(j);
        let w = BigRational::from_ratio(2, 3);
        self.axis_value(j - 1)
            - w.clone() * self.slow_term(j, k)
            - w * (spow::<BigRational>(3, j as i32) + BigRational::one()) * self.fast_scale(j, k)
    }

    /// Point on the slanted edge of chain triangle j:
    /// (2^{L-j+1} - 2^{L-j-k}, 2^{L-j-k}).
    pub fn edge_y_point(&self, j: u32, k: u32, n: u32) -> Option<Vertex> {
        self.family_range(j);
        let e = self.cluster_log2 as i64 - j as i64 - k as i64 + n as i64;
        if e < 0 {
            return None;
        }
        let a = (1u64 << (self.cluster_log2 - j + 1 + n)) - (1u64 << e);
        Some(Vertex::new(Half::Plus, a, 1u64 << e))
    }

    pub fn edge_y_value(&self, j: u32, k: u32) -> BigRational {
        self.family_range(j);
        let w = BigRational::from_ratio(2, 3);
        self.axis_value(j - 1)
            - w.clone() * self.slow_term(j, k)
            + w * (spow::<BigRational>(3, j as i32) - BigRational::from_ratio(3, 1))
                * self.fast_scale(j, k)
    }

    /// Midpoint of the two edge points at the same k:
    /// (2^{L-j+1} - 2^{L-j-k}, 2^{L-j-k-1}).
    pub fn edge_z_point(&self, j: u32, k: u32, n: u32) -> Option<Vertex> {
        self.family_range(j);
        let e = self.cluster_log2 as i64 - j as i64 - k as i64 + n as i64;
        if e < 1 {
            return None;
        }
        let a = (1u64 << (self.cluster_log2 - j + 1 + n)) - (1u64 << e);
        Some(Vertex::new(Half::Plus, a, 1u64 << (e - 1)))
    }

    pub fn edge_z_value(&self, j: u32, k: u32) -> BigRational {
        self.family_range(j);
        let w = BigRational::from_ratio(8, 15);
        self.axis_value(j - 1)
            - w.clone() * self.slow_term(j, k)
            - w * self.fast_scale(j, k)
    }

    /// Corners of the j-th chain triangle at level n: previous axis
    /// junction, current axis junction, apex. Valid for j = 1..=L-l.
    pub fn chain_triangle(&self, j: u32, n: u32) -> [Vertex; 3] {
        [self.axis_point(j - 1, n), self.axis_point(j, n), self.apex_point(j, n)]
    }

    /// All closed-form junction values realizable as level-n lattice
    /// points, as (vertex, continuum-normalized obstacle value).
    pub fn junction_values(&self, n: u32) -> Vec<(Vertex, BigRational)> {
        let depth = self.cluster_log2 - self.source_log2;
        let mut out = Vec::new();
        for j in 0..=depth {
            out.push((self.axis_point(j, n), self.axis_value(j)));
        }
        for j in 1..=depth {
            out.push((self.apex_point(j, n), self.apex_value(j)));
        }
        for j in 1..depth {
            for k in 1.. {
                let Some(x) = self.edge_x_point(j, k, n) else { break };
                out.push((x, self.edge_x_value(j, k)));
                out.push((self.edge_y_point(j, k, n).unwrap(), self.edge_y_value(j, k)));
                if let Some(z) = self.edge_z_point(j, k, n) {
                    out.push((z, self.edge_z_value(j, k)));
                }
            }
        }
        out
    }
}

/// Center value of the constant-load profile on B(0, 2^i) whose rescaled
/// Laplacian is 4/3 at every level: -4/3 * 5^i.
pub fn profile_center_value(i: u32) -> BigRational {
    BigRational::from_ratio(-4, 3) * spow::<BigRational>(5, i as i32)
}

/// Profile value at the j-th interior-edge point approaching the top
/// corner: 5^i (-2 (3/5)^j + 2/3 (1/5)^j).
pub fn profile_edge_a(i: u32, j: u32) -> BigRational {
    let r35 = spow::<BigRational>(3, j as i32) * spow::<BigRational>(5, -(j as i32));
    let r15 = spow::<BigRational>(5, -(j as i32));
    spow::<BigRational>(5, i as i32)
        * (BigRational::from_ratio(-2, 1) * r35 + BigRational::from_ratio(2, 3) * r15)
}

/// Profile value at the j-th outer-edge point approaching the top corner:
/// 5^i (-2 (3/5)^j + 2 (1/5)^j).
pub fn profile_edge_b(i: u32, j: u32) -> BigRational {
    let r35 = spow::<BigRational>(3, j as i32) * spow::<BigRational>(5, -(j as i32));
    let r15 = spow::<BigRational>(5, -(j as i32));
    spow::<BigRational>(5, i as i32)
        * (BigRational::from_ratio(-2, 1) * r35 + BigRational::from_ratio(2, 1) * r15)
}

/// a_j = (0, 2^{i+n} - 2^{i+n-j}): on the edge through the origin, at
/// dyadic distance 2^{-j} of the domain size below the top corner.
/// Requires j <= i+n; a_0 is the origin.
pub fn profile_edge_a_point(i: u32, j: u32, n: u32) -> Vertex {
    assert!(j <= i + n);
    let side = 1u64 << (i + n);
    Vertex::new(Half::Plus, 0, side - (side >> j))
}

/// b_j = (2^{i+n-j}, 2^{i+n} - 2^{i+n-j}): on the outer boundary edge,
/// same dyadic distance from the top corner; b_0 is the right corner.
pub fn profile_edge_b_point(i: u32, j: u32, n: u32) -> Vertex {
    assert!(j <= i + n);
    let side = 1u64 << (i + n);
    Vertex::new(Half::Plus, side >> j, side - (side >> j))
}

pub fn profile_top_corner(i: u32, n: u32) -> Vertex {
    Vertex::new(Half::Plus, 0, 1u64 << (i + n))
}

/// Two-neighbor normal-derivative partial sum at the top corner, taken at
/// dyadic depth d below the corner scale: (5/3)^d (2 f(x) - f(a) - f(b))
/// with f(x) = 0. Closed form: 4 * 3^i - 8 * 3^{-(d+1)}.
pub fn normal_derivative_partial(i: u32, depth: u32) -> BigRational {
    BigRational::from_ratio(4, 1) * spow::<BigRational>(3, i as i32)
        - BigRational::from_ratio(8, 1) * spow::<BigRational>(3, -(depth as i32 + 1))
}

/// Limit of the partial sums: 4 * 3^i.
pub fn normal_derivative_limit(i: u32) -> BigRational {
    BigRational::from_ratio(4, 1) * spow::<BigRational>(3, i as i32)
}
