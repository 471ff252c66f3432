//! Graph Laplacian, Dirichlet energy, harmonic extension with prescribed
//! loads, piecewise-harmonic splines, and uniform-load potential profiles.
//!
//! Levels are physical: a field can live on a graph coarser than the unit
//! lattice (level m < 0, mesh 2^{-m}), realized as any `GasketLevel` of side
//! 2^{L+m}. Enumeration order depends only on the side, so value vectors
//! transfer between equal-side graphs unchanged.

use crate::scalar::Scalar;
use crate::{GasketLevel, Vertex};

/// base^k in the scalar type (k may be negative; magnitudes stay in i64).
pub fn spow<S: Scalar>(base: u64, k: i32) -> S {
    let p = base.pow(k.unsigned_abs());
    if k >= 0 {
        S::from_ratio(p as i64, 1)
    } else {
        S::from_ratio(1, p)
    }
}

/// (5/3)^k in the scalar type.
pub fn energy_weight<S: Scalar>(k: i32) -> S {
    spow::<S>(5, k) / spow::<S>(3, k)
}

/// Quarter-mean increment: (1/4) sum over neighbors of (f(z) - f(x)).
/// At the four domain corners the truncated neighbor sum is used.
pub fn laplacian_raw<S: Scalar>(g: &GasketLevel, f: &[S]) -> Vec<S> {
    assert_eq!(f.len(), g.vertex_count());
    let quarter = S::from_ratio(1, 4);
    (0..g.vertex_count() as u32)
        .map(|i| {
            let mut acc = S::zero();
            for &j in g.neighbors(i) {
                acc = acc + f[j as usize].clone() - f[i as usize].clone();
            }
            acc * quarter.clone()
        })
        .collect()
}

/// Level-m Laplacian: 5^m times the quarter-mean increment.
pub fn laplacian<S: Scalar>(g: &GasketLevel, level: i32, f: &[S]) -> Vec<S> {
    let w = spow::<S>(5, level);
    laplacian_raw(g, f).into_iter().map(|x| x * w.clone()).collect()
}

/// Dirichlet energy form at physical level m:
/// (5/3)^m (1/4) sum over edges of (f(x)-f(y))(h(x)-h(y)).
pub fn energy<S: Scalar>(g: &GasketLevel, level: i32, f: &[S], h: &[S]) -> S {
    assert_eq!(f.len(), g.vertex_count());
    assert_eq!(h.len(), g.vertex_count());
    let mut acc = S::zero();
    for i in 0..g.vertex_count() as u32 {
        for &j in g.neighbors(i) {
            if j > i {
                let df = f[i as usize].clone() - f[j as usize].clone();
                let dh = h[i as usize].clone() - h[j as usize].clone();
                acc = acc + df * dh;
            }
        }
    }
    acc * S::from_ratio(1, 4) * energy_weight::<S>(level)
}

/// One refinement step. `fine` must be the same domain at half the mesh
/// (side doubled). Coarse vertex values are carried over unchanged; each
/// coarse cell's three edge midpoints are filled with the loaded-extension
/// values: the midpoint opposite corner X gets
///   (f(X) + 2 f(Y) + 2 f(Z)) / 5 - 2 * load(midpoint),
/// where `load` is the raw (unrescaled) quarter-mean increment prescribed at
/// that midpoint. With zero load this is the harmonic extension; prescribing
/// load lambda * 5^{-(m+1)} at every midpoint of the refinement to level m+1
/// keeps the level-rescaled Laplacian equal to lambda at old interior
/// vertices and establishes it at new ones.
pub fn refine<S: Scalar>(
    coarse: &GasketLevel,
    fine: &GasketLevel,
    vals: &[S],
    mut load: impl FnMut(Vertex) -> S,
) -> Vec<S> {
    assert_eq!(fine.side(), 2 * coarse.side(), "refine expects one subdivision step");
    assert_eq!(vals.len(), coarse.vertex_count());

    let mut out = vec![S::zero(); fine.vertex_count()];
    for (i, &v) in coarse.vertices().iter().enumerate() {
        let fv = Vertex::new(v.half, 2 * v.a, 2 * v.b);
        out[fine.index_of(fv).unwrap() as usize] = vals[i].clone();
    }

    let fifth = S::from_ratio(1, 5);
    let two = S::from_ratio(2, 1);
    for cell in coarse.cells_at_scale(coarse.n() as i32) {
        let val = |a: u64, b: u64| -> S {
            let i = coarse.index_of(Vertex::new(cell.half, a, b)).unwrap();
            vals[i as usize].clone()
        };
        let fa = val(cell.a, cell.b);
        let fb = val(cell.a + 1, cell.b);
        let fc = val(cell.a, cell.b + 1);
        let (fa2, fb2) = (2 * cell.a, 2 * cell.b);
        // (midpoint, opposite corner value, adjacent corner values)
        let mids = [
            (Vertex::new(cell.half, fa2 + 1, fb2 + 1), fa.clone(), fb.clone(), fc.clone()),
            (Vertex::new(cell.half, fa2, fb2 + 1), fb.clone(), fa.clone(), fc.clone()),
            (Vertex::new(cell.half, fa2 + 1, fb2), fc.clone(), fa.clone(), fb.clone()),
        ];
        for (m, opp, adj1, adj2) in mids {
            let v = (opp + two.clone() * (adj1 + adj2)) * fifth.clone()
                - two.clone() * load(m);
            out[fine.index_of(m).unwrap() as usize] = v;
        }
    }
    out
}

/// Ladder of same-domain graphs from physical level `lo` to `hi` over the
/// double triangle B(0, 2^domain_log2). Graph k has side 2^{domain_log2+lo+k}.
pub struct LevelLadder {
    pub domain_log2: u32,
    pub lo: i32,
    pub graphs: Vec<GasketLevel>,
}

impl LevelLadder {
    pub fn new(domain_log2: u32, lo: i32, hi: i32) -> LevelLadder {
        assert!(lo + (domain_log2 as i32) >= 0, "level coarser than the domain");
        assert!(lo <= hi);
        let graphs = (lo..=hi)
            .map(|p| GasketLevel::new((p + domain_log2 as i32) as u32, 0))
            .collect();
        LevelLadder { domain_log2, lo, graphs }
    }

    pub fn graph(&self, level: i32) -> &GasketLevel {
        &self.graphs[(level - self.lo) as usize]
    }

    pub fn top(&self) -> &GasketLevel {
        self.graphs.last().unwrap()
    }

    /// Harmonic (zero-load) extension from `level` to the top level.
    pub fn extend_harmonic<S: Scalar>(&self, level: i32, vals: Vec<S>) -> Vec<S> {
        let hi = self.lo + self.graphs.len() as i32 - 1;
        let mut cur = vals;
        for p in level..hi {
            cur = refine(self.graph(p), self.graph(p + 1), &cur, |_| S::zero());
        }
        cur
    }

    /// Extension from `level` with constant rescaled load lambda: the result
    /// has level-rescaled Laplacian lambda at every interior vertex of every
    /// intermediate level (provided the seed already satisfies it).
    pub fn extend_uniform_load<S: Scalar>(&self, level: i32, vals: Vec<S>, lambda: S) -> Vec<S> {
        let hi = self.lo + self.graphs.len() as i32 - 1;
        let mut cur = vals;
        for p in level..hi {
            let raw = lambda.clone() * spow::<S>(5, -(p + 1));
            cur = refine(self.graph(p), self.graph(p + 1), &cur, |_| raw.clone());
        }
        cur
    }
}

/// The profile Phi on B(0, 2^domain_log2) with level-n Laplacian lambda at
/// every non-corner vertex, Phi = 0 at the four corners, built from the
/// five-vertex coarse seed Phi(0) = -lambda 5^domain_log2 by loaded
/// extension. Values are in enumeration order of any side-2^{domain_log2+n}
/// graph.
pub fn uniform_load_profile<S: Scalar>(n: u32, domain_log2: u32, lambda: S) -> Vec<S> {
    let l = domain_log2 as i32;
    let ladder = LevelLadder::new(domain_log2, -l, n as i32);
    let seed_graph = ladder.graph(-l);
    let mut seed = vec![S::zero(); seed_graph.vertex_count()];
    let o = seed_graph.index_of(Vertex::origin()).unwrap();
    seed[o as usize] = -(lambda.clone() * spow::<S>(5, l));
    ladder.extend_uniform_load(-l, seed, lambda)
}

/// Piecewise-harmonic spline: the harmonic extension to level n of the
/// indicator of z among level-m vertices. Supported on the double triangle
/// of scale-m cells around z; the family over all level-m vertices is a
/// partition of unity.
pub fn spline_values<S: Scalar>(domain_log2: u32, level: i32, z: Vertex, n: u32) -> Vec<S> {
    assert!(level <= n as i32);
    let ladder = LevelLadder::new(domain_log2, level, n as i32);
    let g0 = ladder.graph(level);
    let zi = g0.index_of(z).expect("spline center is not a vertex at its level");
    let mut seed = vec![S::zero(); g0.vertex_count()];
    seed[zi as usize] = S::one();
    ladder.extend_harmonic(level, seed)
}
