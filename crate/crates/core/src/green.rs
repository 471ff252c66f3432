//! Stopped Green functions on the double triangle, by two independent
//! routes, plus expected exit times of graph balls.
//!
//! Route 1 (`GreenTable`): the killed-walk route. The simple random walk is
//! stopped on the four domain corners; the expected visit counts are
//! (I - Q)^{-1} for the substochastic interior transition matrix Q, scaled
//! by (3/5)^n.
//!
//! Route 2 (`GreenSeries`): the spline-series route. A telescoping sum of
//! piecewise-harmonic spline products over refinement levels, with
//! per-level kernel 18/25 r^m on the diagonal and 6/25 r^m between distinct
//! midpoints of a common scale-m cell (r = 3/5). The two routes must agree
//! on the nose; tests and the acceptance suite compare them.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::harmonic::{energy_weight, spline_values, spow};
use crate::scalar::Scalar;
use crate::solve::conjugate_gradient;
use crate::{Error, GasketLevel, Half, Result, Vertex};

/// Dense table of stopped Green values g(x,y) = (3/5)^n E_x[#visits to y
/// before hitting a domain corner].
pub struct GreenTable {
    n: u32,
    row_of: Vec<Option<u32>>,
    values: DMatrix<f64>,
}

impl GreenTable {
    pub fn build(g: &GasketLevel) -> GreenTable {
        let interior = g.interior_indices();
        let k = interior.len();
        assert!(k <= 20_000, "dense Green table would need {k}x{k} entries");
        let mut row_of = vec![None; g.vertex_count()];
        for (r, &i) in interior.iter().enumerate() {
            row_of[i as usize] = Some(r as u32);
        }

        let mut a = DMatrix::<f64>::identity(k, k);
        for (r, &i) in interior.iter().enumerate() {
            for &j in g.neighbors(i) {
                if let Some(c) = row_of[j as usize] {
                    a[(r, c as usize)] -= 0.25;
                }
            }
        }
        let inv = a.try_inverse().expect("I - Q is invertible for a killed walk");
        let scale = spow::<f64>(3, g.n() as i32) / spow::<f64>(5, g.n() as i32);
        GreenTable { n: g.n(), row_of, values: inv * scale }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// g(x,y); zero whenever either argument is a domain corner.
    pub fn green(&self, x: u32, y: u32) -> f64 {
        match (self.row_of[x as usize], self.row_of[y as usize]) {
            (Some(r), Some(c)) => self.values[(r as usize, c as usize)],
            _ => 0.0,
        }
    }

    /// Green operator: delta_n^alpha sum_y g(x,y) f(y), over all vertices.
    /// Satisfies laplacian(level n) of the result = -f on the interior.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.row_of.len());
        let alpha = spow::<f64>(3, -(self.n as i32));
        let k = self.values.nrows();
        // Accumulate over interior columns.
        let mut interior_acc = vec![0.0; k];
        for (y, w) in f.iter().enumerate() {
            if let Some(c) = self.row_of[y] {
                if *w != 0.0 {
                    for r in 0..k {
                        interior_acc[r] += self.values[(r, c as usize)] * w;
                    }
                }
            }
        }
        self.row_of
            .iter()
            .map(|row| row.map_or(0.0, |r| alpha * interior_acc[r as usize]))
            .collect()
    }
}

fn cell_key(half: Half, a: u64, b: u64) -> u64 {
    ((half == Half::Minus) as u64) << 62 | a << 31 | b
}

struct LevelTable<S> {
    /// r^m kernel weight for this refinement level.
    rm: S,
    /// Per vertex: (parent-cell key, midpoint id 0..3, spline value).
    per_vertex: Vec<Vec<(u64, u8, S)>>,
}

/// Spline-series evaluator of the same stopped Green function.
pub struct GreenSeries<S> {
    base_w: S,
    base: Vec<S>,
    levels: Vec<LevelTable<S>>,
    diag: S,
    off: S,
}

impl<S: Scalar> GreenSeries<S> {
    pub fn build(g: &GasketLevel) -> GreenSeries<S> {
        let (n, l) = (g.n() as i32, g.domain_log2() as i32);
        let base = spline_values::<S>(g.domain_log2(), -l, Vertex::origin(), g.n());
        let base_w = energy_weight::<S>(l);

        let mut levels = Vec::new();
        for m in -l..n {
            let mut per_vertex: Vec<Vec<(u64, u8, S)>> = vec![Vec::new(); g.vertex_count()];
            for parent in g.cells_at_scale(m) {
                let (pa, pb) = (parent.a, parent.b);
                let key = cell_key(parent.half, pa, pb);
                // Midpoint id 0 sits opposite the bottom-left corner, 1
                // opposite the right corner, 2 opposite the top corner.
                // Each spline is supported on the two child cells meeting at
                // its midpoint; seed those with indicator corner values.
                let seeds: [(u8, [(u64, u64, [i8; 3]); 2]); 3] = [
                    (0, [
                        (2 * pa + 1, 2 * pb, [0, 0, 1]),
                        (2 * pa, 2 * pb + 1, [0, 1, 0]),
                    ]),
                    (1, [
                        (2 * pa, 2 * pb, [0, 0, 1]),
                        (2 * pa, 2 * pb + 1, [1, 0, 0]),
                    ]),
                    (2, [
                        (2 * pa, 2 * pb, [0, 1, 0]),
                        (2 * pa + 1, 2 * pb, [1, 0, 0]),
                    ]),
                ];
                for (mid_id, fills) in seeds {
                    let mut support: HashMap<u32, S> = HashMap::new();
                    for (ca, cb, ind) in fills {
                        let vals = ind.map(|x| if x == 1 { S::one() } else { S::zero() });
                        fill_spline(g, parent.half, m + 1, ca, cb, vals, &mut support);
                    }
                    for (vi, val) in support {
                        if val != S::zero() {
                            per_vertex[vi as usize].push((key, mid_id, val));
                        }
                    }
                }
            }
            levels.push(LevelTable { rm: energy_weight::<S>(-m), per_vertex });
        }

        GreenSeries {
            base_w,
            base,
            levels,
            diag: S::from_ratio(18, 25),
            off: S::from_ratio(6, 25),
        }
    }

    pub fn value(&self, x: u32, y: u32) -> S {
        let mut acc =
            self.base_w.clone() * self.base[x as usize].clone() * self.base[y as usize].clone();
        for lt in &self.levels {
            for (k1, id1, p1) in &lt.per_vertex[x as usize] {
                for (k2, id2, p2) in &lt.per_vertex[y as usize] {
                    if k1 == k2 {
                        let coeff = if id1 == id2 { &self.diag } else { &self.off };
                        acc = acc + coeff.clone() * lt.rm.clone() * p1.clone() * p2.clone();
                    }
                }
            }
        }
        acc
    }
}

/// Assign the piecewise-harmonic interpolation of the corner values
/// (ordered bottom-left, right, top) on the scale-k cell (a, b) to every
/// level-n vertex of the cell. Shared corners are written repeatedly with
/// equal values.
fn fill_spline<S: Scalar>(
    g: &GasketLevel,
    half: Half,
    k: i32,
    a: u64,
    b: u64,
    vals: [S; 3],
    out: &mut HashMap<u32, S>,
) {
    let n = g.n() as i32;
    debug_assert!(k <= n);
    if k == n {
        let [va, vb, vc] = vals;
        for ((da, db), v) in [((0, 0), va), ((1, 0), vb), ((0, 1), vc)] {
            let idx = g
                .index_of(Vertex::new(half, a + da, b + db))
                .expect("cell corner inside the domain");
            out.insert(idx, v);
        }
        return;
    }
    let [va, vb, vc] = vals;
    let fifth = S::from_ratio(1, 5);
    let two = S::from_ratio(2, 1);
    let ma = (va.clone() + two.clone() * (vb.clone() + vc.clone())) * fifth.clone();
    let mb = (vb.clone() + two.clone() * (va.clone() + vc.clone())) * fifth.clone();
    let mc = (vc.clone() + two.clone() * (va.clone() + vb.clone())) * fifth;
    fill_spline(g, half, k + 1, 2 * a, 2 * b, [va, mc.clone(), mb.clone()], out);
    fill_spline(g, half, k + 1, 2 * a + 1, 2 * b, [mc, vb, ma.clone()], out);
    fill_spline(g, half, k + 1, 2 * a, 2 * b + 1, [mb, ma, vc], out);
}

/// Single Green column by conjugate gradient, for graphs past the dense
/// table guard: returns g(., y) over all vertices.
pub fn green_column(g: &GasketLevel, y: u32) -> Result<Vec<f64>> {
    let interior = g.interior_indices();
    let mut row_of = vec![None; g.vertex_count()];
    for (r, &i) in interior.iter().enumerate() {
        row_of[i as usize] = Some(r);
    }
    let apply = |v: &[f64], out: &mut [f64]| {
        for (r, &i) in interior.iter().enumerate() {
            let mut acc = v[r];
            for &j in g.neighbors(i) {
                if let Some(c) = row_of[j as usize] {
                    acc -= 0.25 * v[c];
                }
            }
            out[r] = acc;
        }
    };
    let mut rhs = vec![0.0; interior.len()];
    let ry = row_of[y as usize].ok_or_else(|| {
        Error::Solver("green column requested at a boundary vertex".into())
    })?;
    rhs[ry] = 1.0;
    let sol = conjugate_gradient(apply, &rhs, 1e-13, 40 * interior.len() + 100)?;
    let scale = spow::<f64>(3, g.n() as i32) / spow::<f64>(5, g.n() as i32);
    Ok(row_of.iter().map(|r| r.map_or(0.0, |r| scale * sol[r])).collect())
}

/// Expected exit times of a graph ball: solves (I - Q) t = 1 over the ball.
#[derive(Debug)]
pub struct ExitTimes {
    /// Sorted vertex indices of the closed graph ball.
    pub ball: Vec<u32>,
    /// Expected steps to leave the ball, aligned with `ball`.
    pub times: Vec<f64>,
    pub center_time: f64,
}

impl ExitTimes {
    /// Exit-time field over the whole graph, zero outside the ball.
    pub fn field(&self, g: &GasketLevel) -> Vec<f64> {
        let mut out = vec![0.0; g.vertex_count()];
        for (p, &i) in self.ball.iter().enumerate() {
            out[i as usize] = self.times[p];
        }
        out
    }

    /// Centered companion: phi(y) = E_center[tau] - E_y[tau]; vanishes at the
    /// center and has quarter-mean increment +1 across the ball.
    pub fn centered_profile(&self, g: &GasketLevel) -> Vec<f64> {
        self.field(g).iter().map(|t| self.center_time - t).collect()
    }
}

pub fn exit_times(g: &GasketLevel, center: Vertex, radius: u32) -> Result<ExitTimes> {
    let c = g.require_index(center)?;
    let ball = g.graph_ball(c, radius);
    if let Some(&i) = ball.iter().find(|&&i| g.is_boundary(i)) {
        // A truncated corner inside the ball distorts the walk's degrees.
        return Err(Error::BoundaryContact { vertex: g.vertex(i) });
    }
    let pos: HashMap<u32, usize> = ball.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        for (p, &i) in ball.iter().enumerate() {
            let mut acc = v[p];
            for &j in g.neighbors(i) {
                if let Some(&q) = pos.get(&j) {
                    acc -= 0.25 * v[q];
                }
            }
            out[p] = acc;
        }
    };
    let rhs = vec![1.0; ball.len()];
    let times = conjugate_gradient(apply, &rhs, 1e-12, 10 * ball.len() + 100)?;
    let center_time = times[pos[&c]];
    Ok(ExitTimes { ball, times, center_time })
}
