//! Discrete obstacle problem: the potential-theoretic obstacle built from a
//! mass density, its least superharmonic majorant, the odometer u = s - gamma,
//! and the noncoincidence sets.

use crate::fields::{discretize, Density, DensityField};
use crate::green::GreenTable;
use crate::sandpile::CLUSTER_TOL;
use crate::smooth::smooth;
use crate::solve::conjugate_gradient;
use crate::{beta_scale, Error, GasketLevel, Result};

/// Obstacle gamma_n for a discretized density: the unique field with
/// laplacian(level n) equal to sigma - 1 on the interior and zero at the
/// domain corners. Computed by conjugate gradient on the killed-walk system.
pub fn obstacle_profile(g: &GasketLevel, sigma: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(sigma.len(), g.vertex_count());
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
    // Quarter-mean increment of gamma = 5^{-n} (sigma - 1) on the interior.
    let scale = beta_scale(g.n());
    let rhs: Vec<f64> =
        interior.iter().map(|&i| scale * (1.0 - sigma[i as usize])).collect();
    let sol = conjugate_gradient(apply, &rhs, 1e-12, 60 * interior.len() + 200)?;
    let mut out = vec![0.0; g.vertex_count()];
    for (r, &i) in interior.iter().enumerate() {
        out[i as usize] = sol[r];
    }
    Ok(out)
}

/// Same obstacle through the dense Green table: gamma = -G(sigma - 1).
/// Usable when the table fits; the conjugate-gradient route above is the
/// large-graph path.
pub fn build_obstacle(green: &GreenTable, sigma: &[f64]) -> Vec<f64> {
    let load: Vec<f64> = sigma.iter().map(|&s| 1.0 - s).collect();
    green.apply(&load)
}

/// Relaxation factor for the projected-SOR majorant sweeps; 1.0 recovers
/// plain projected Gauss-Seidel.
pub const MAJORANT_OMEGA: f64 = 1.8;

const MAJORANT_SWEEP_CAP: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct MajorantSolve {
    pub values: Vec<f64>,
    pub sweeps: u64,
    /// Largest single-vertex update in the final sweep.
    pub residual: f64,
}

/// Least superharmonic function above gamma with the corner values of
/// gamma held fixed. Projected SOR from the constant upper bound:
/// s <- max(gamma, (1-omega) s + omega * neighbor mean), swept until the
/// largest update drops below 1e-10 * range(gamma).
pub fn least_majorant(g: &GasketLevel, gamma: &[f64], omega: f64) -> Result<MajorantSolve> {
    assert_eq!(gamma.len(), g.vertex_count());
    assert!((0.0..2.0).contains(&omega) && omega > 0.0);
    let lo = gamma.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-10 * (hi - lo).max(f64::MIN_POSITIVE);
    let interior = g.interior_indices();

    let mut s = vec![hi; gamma.len()];
    for c in g.corner_indices() {
        s[c as usize] = gamma[c as usize];
    }
    let mut sweeps = 0u64;
    loop {
        let mut update = 0.0f64;
        for &i in &interior {
            let x = i as usize;
            let mut acc = 0.0;
            for &j in g.neighbors(i) {
                acc += s[j as usize];
            }
            let relaxed = (1.0 - omega) * s[x] + omega * 0.25 * acc;
            let next = relaxed.max(gamma[x]);
            update = update.max((next - s[x]).abs());
            s[x] = next;
        }
        sweeps += 1;
        if update < tol {
            return Ok(MajorantSolve { values: s, sweeps, residual: update });
        }
        if sweeps >= MAJORANT_SWEEP_CAP {
            return Err(Error::Solver(format!(
                "majorant sweep cap {MAJORANT_SWEEP_CAP} reached, residual {update:e}"
            )));
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObstacleProblem {
    pub n: u32,
    pub domain_log2: u32,
    pub sigma: Vec<f64>,
    pub gamma: Vec<f64>,
    pub majorant: Vec<f64>,
    /// u = majorant - gamma, already in rescaled units.
    pub odometer: Vec<f64>,
    /// Noncoincidence set D_n = {u > threshold}.
    pub cluster: Vec<u32>,
    /// D_n together with the interior vertices where sigma >= 1.
    pub cluster_full: Vec<u32>,
    pub sweeps: u64,
    pub residual: f64,
}

/// Solve the full obstacle problem for a discretized density.
pub fn solve(g: &GasketLevel, sigma: &DensityField) -> Result<ObstacleProblem> {
    assert!(sigma.n == g.n() && sigma.domain_log2 == g.domain_log2());
    let gamma = obstacle_profile(g, &sigma.values)?;
    let maj = least_majorant(g, &gamma, MAJORANT_OMEGA)?;
    let odometer: Vec<f64> =
        maj.values.iter().zip(&gamma).map(|(s, c)| s - c).collect();
    let cluster: Vec<u32> = (0..g.vertex_count() as u32)
        .filter(|&i| odometer[i as usize] > CLUSTER_TOL)
        .collect();
    let mut cluster_full = cluster.clone();
    for i in 0..g.vertex_count() as u32 {
        if sigma.values[i as usize] >= 1.0 - 1e-12
            && !g.is_boundary(i)
            && odometer[i as usize] <= CLUSTER_TOL
        {
            cluster_full.push(i);
        }
    }
    cluster_full.sort_unstable();
    Ok(ObstacleProblem {
        n: g.n(),
        domain_log2: g.domain_log2(),
        sigma: sigma.values.clone(),
        gamma,
        majorant: maj.values,
        odometer,
        cluster,
        cluster_full,
        sweeps: maj.sweeps,
        residual: maj.residual,
    })
}

/// kappa(n) = ceil(2^{n/2}): grows without bound while kappa * 2^{-n}
/// still vanishes.
pub fn kappa_default(n: u32) -> u32 {
    (2.0f64).powf(n as f64 / 2.0).ceil() as u32
}

/// Apply kappa lazy smoothing steps to a density.
pub fn smoothed_density(g: &GasketLevel, sigma: &DensityField, kappa: u32) -> DensityField {
    DensityField {
        n: sigma.n,
        domain_log2: sigma.domain_log2,
        values: smooth(g, &sigma.values, kappa),
    }
}

#[derive(Clone, Debug)]
pub struct LadderReport {
    pub levels: Vec<u32>,
    /// sup over level-k vertices of |u_k - u_{k+1}|, one entry per
    /// consecutive pair.
    pub consecutive_sup: Vec<f64>,
    /// sup over the original domain's vertices of the top-level odometer
    /// change when the domain is enlarged one dyadic step.
    pub enlarged_domain_sup: f64,
}

/// Solve the obstacle problem at each level on a fixed domain and compare
/// odometers across levels (coarse vertices embed by doubling coordinates)
/// and against a once-enlarged domain at the top level.
pub fn continuum_ladder(density: &Density, n_lo: u32, n_hi: u32) -> Result<LadderReport> {
    assert!(n_lo <= n_hi);
    let bound = density.bound_log2;
    let mut solved = Vec::new();
    for n in n_lo..=n_hi {
        let g = GasketLevel::new(n, bound);
        let sigma = discretize(density, &g)?;
        let p = solve(&g, &sigma)?;
        for &i in &p.cluster_full {
            if g.is_boundary(i) {
                return Err(Error::BoundaryContact { vertex: g.vertex(i) });
            }
        }
        solved.push((g, p));
    }

    let mut consecutive_sup = Vec::new();
    for w in solved.windows(2) {
        let (ga, pa) = &w[0];
        let (gb, pb) = &w[1];
        let mut sup = 0.0f64;
        for (i, v) in ga.vertices().iter().enumerate() {
            let fine = crate::Vertex::new(v.half, 2 * v.a, 2 * v.b);
            let j = gb.index_of(fine).expect("coarse vertices embed in the finer level");
            sup = sup.max((pa.odometer[i] - pb.odometer[j as usize]).abs());
        }
        consecutive_sup.push(sup);
    }

    let (g_top, p_top) = solved.last().expect("at least one level");
    let g_big = GasketLevel::new(n_hi, bound + 1);
    let sigma_big = discretize(density, &g_big)?;
    let p_big = solve(&g_big, &sigma_big)?;
    let mut enlarged_domain_sup = 0.0f64;
    for (i, v) in g_top.vertices().iter().enumerate() {
        let j = g_big.index_of(*v).expect("domain growth keeps all vertices");
        enlarged_domain_sup =
            enlarged_domain_sup.max((p_top.odometer[i] - p_big.odometer[j as usize]).abs());
    }

    Ok(LadderReport {
        levels: (n_lo..=n_hi).collect(),
        consecutive_sup,
        enlarged_domain_sup,
    })
}
