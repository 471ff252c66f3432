//! Divisible sandpile stabilization.
//!
//! A vertex holding mass above 1 keeps 1 and splits the excess equally
//! among its four neighbors. Stabilization runs sequential full sweeps in a
//! fixed order until the total excess drops below a relative tolerance; the
//! abelian property makes the sweep order immaterial up to that tolerance.

use crate::fields::{discretize, Density, DensityField};
use crate::gasket::GasketLevel;
use crate::{beta_scale, Error, Result, Vertex};

/// Vertex visiting order for a sweep. Enumeration order is (half, b, a)
/// with the Plus half first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepOrder {
    Lex,
    ReverseLex,
}

pub const DEFAULT_TOL: f64 = 1e-10;

/// Rescaled-odometer threshold separating the cluster from roundoff.
pub const CLUSTER_TOL: f64 = 1e-8;

const SWEEP_CAP: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct SandpileState {
    n: u32,
    domain_log2: u32,
    /// Current mass per vertex.
    pub mass: Vec<f64>,
    /// Total mass emitted per vertex (raw odometer).
    pub emitted: Vec<f64>,
    /// Completed full sweeps.
    pub sweeps: u64,
    /// Absolute stopping tolerance the run was stabilized to.
    pub tol_total: f64,
}

impl SandpileState {
    pub fn new(sigma: &DensityField) -> SandpileState {
        SandpileState {
            n: sigma.n,
            domain_log2: sigma.domain_log2,
            mass: sigma.values.clone(),
            emitted: vec![0.0; sigma.values.len()],
            sweeps: 0,
            tol_total: 0.0,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn domain_log2(&self) -> u32 {
        self.domain_log2
    }

    fn check_ctx(&self, g: &GasketLevel) {
        assert!(
            self.n == g.n()
                && self.domain_log2 == g.domain_log2()
                && self.mass.len() == g.vertex_count(),
            "state does not belong to this graph"
        );
    }

    /// Topple one vertex in full: keep 1, push excess/4 to each neighbor.
    /// Returns the excess moved (0 for a stable vertex).
    pub fn topple(&mut self, g: &GasketLevel, i: u32) -> Result<f64> {
        self.check_ctx(g);
        let e = self.mass[i as usize] - 1.0;
        if e <= 0.0 {
            return Ok(0.0);
        }
        if g.is_boundary(i) {
            return Err(Error::BoundaryContact { vertex: g.vertex(i) });
        }
        let q = e * 0.25;
        self.mass[i as usize] = 1.0;
        self.emitted[i as usize] += e;
        for &j in g.neighbors(i) {
            self.mass[j as usize] += q;
        }
        Ok(e)
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn total_excess(&self) -> f64 {
        self.mass.iter().map(|&m| (m - 1.0).max(0.0)).sum()
    }

    /// Rescaled odometer u_n = 5^{-n} * emitted.
    pub fn odometer(&self) -> Vec<f64> {
        let s = beta_scale(self.n);
        self.emitted.iter().map(|&e| s * e).collect()
    }

    /// Indices with rescaled odometer above [`CLUSTER_TOL`].
    pub fn cluster(&self) -> Vec<u32> {
        let raw_tol = CLUSTER_TOL / beta_scale(self.n);
        (0..self.emitted.len() as u32)
            .filter(|&i| self.emitted[i as usize] > raw_tol)
            .collect()
    }
}

/// One full sweep. Returns the sum of visit-time excesses, an upper bound
/// for the total excess left by the previous sweep (additions within this
/// sweep only raise it), so it is a safe stopping statistic.
fn sweep(state: &mut SandpileState, g: &GasketLevel, order: SweepOrder) -> Result<f64> {
    let v = g.vertex_count() as u32;
    let mut seen = 0.0;
    let mut visit = |state: &mut SandpileState, i: u32| -> Result<()> {
        let e = state.mass[i as usize] - 1.0;
        if e <= 0.0 {
            return Ok(());
        }
        seen += e;
        if g.is_boundary(i) {
            return Err(Error::BoundaryContact { vertex: g.vertex(i) });
        }
        let q = e * 0.25;
        state.mass[i as usize] = 1.0;
        state.emitted[i as usize] += e;
        for &j in g.neighbors(i) {
            state.mass[j as usize] += q;
        }
        Ok(())
    };
    match order {
        SweepOrder::Lex => {
            for i in 0..v {
                visit(state, i)?;
            }
        }
        SweepOrder::ReverseLex => {
            for i in (0..v).rev() {
                visit(state, i)?;
            }
        }
    }
    state.sweeps += 1;
    Ok(seen)
}

/// Run full sweeps until the total excess is at most tol * (initial total
/// mass). Errors with [`Error::BoundaryContact`] as soon as a domain
/// boundary vertex would have to topple.
pub fn stabilize(
    g: &GasketLevel,
    sigma: &DensityField,
    tol: f64,
    order: SweepOrder,
) -> Result<SandpileState> {
    let mut state = SandpileState::new(sigma);
    state.check_ctx(g);
    state.tol_total = tol * state.total_mass();
    if state.total_excess() <= state.tol_total {
        return Ok(state);
    }
    loop {
        if state.sweeps >= SWEEP_CAP {
            return Err(Error::Solver(format!(
                "sandpile sweep cap {SWEEP_CAP} reached, excess {}",
                state.total_excess()
            )));
        }
        if sweep(&mut state, g, order)? <= state.tol_total {
            return Ok(state);
        }
    }
}

/// Stabilize, growing the domain by one dyadic step (up to three) whenever
/// the cluster reaches the boundary. Returns the graph actually used.
pub fn stabilize_auto(
    density: &Density,
    n: u32,
    tol: f64,
    order: SweepOrder,
) -> Result<(GasketLevel, SandpileState)> {
    let start = density.bound_log2;
    for growth in 0..=3 {
        let g = GasketLevel::new(n, start + growth);
        let sigma = discretize(density, &g)?;
        match stabilize(&g, &sigma, tol, order) {
            Err(Error::BoundaryContact { vertex }) => {
                if growth == 3 {
                    return Err(Error::BoundaryContact { vertex });
                }
            }
            other => return other.map(|s| (g, s)),
        }
    }
    unreachable!()
}

#[derive(Clone, Debug)]
pub struct LeastActionReport {
    /// sup |nu - sigma - (quarter-mean increment of emitted)|.
    pub max_identity_residual: f64,
    pub worst_identity_vertex: Vertex,
    /// Maximum of the mass implied by the odometer.
    pub max_implied_mass: f64,
    /// Minimum implied mass over the cluster (1 when the cluster is empty).
    pub min_cluster_mass: f64,
    pub pass: bool,
}

pub const LEAST_ACTION_TOL: f64 = 1e-8;

/// Check the stabilized state against the toppling bookkeeping identity
/// nu = sigma + (1/4) sum_y (emitted(y) - emitted(x)) and the stability
/// bound implied-nu <= 1 + tol_total. The implied mass is recomputed from
/// the odometer alone, so tampering with either field is detected.
pub fn least_action_check(
    g: &GasketLevel,
    state: &SandpileState,
    sigma: &DensityField,
) -> LeastActionReport {
    state.check_ctx(g);
    let mut max_res = 0.0f64;
    let mut worst = g.vertex(0);
    let mut max_implied = f64::NEG_INFINITY;
    let mut min_cluster = 1.0f64;
    let raw_tol = CLUSTER_TOL / beta_scale(state.n);
    for i in 0..g.vertex_count() as u32 {
        let x = i as usize;
        let mut acc = 0.0;
        for &j in g.neighbors(i) {
            acc += state.emitted[j as usize] - state.emitted[x];
        }
        let implied = sigma.values[x] + 0.25 * acc;
        let res = (implied - state.mass[x]).abs();
        if res > max_res {
            max_res = res;
            worst = g.vertex(i);
        }
        max_implied = max_implied.max(implied);
        if state.emitted[x] > raw_tol {
            min_cluster = min_cluster.min(implied);
        }
    }
    let pass = max_res < LEAST_ACTION_TOL
        && max_implied <= 1.0 + state.tol_total.max(LEAST_ACTION_TOL)
        && state.emitted.iter().all(|&e| e >= 0.0);
    LeastActionReport {
        max_identity_residual: max_res,
        worst_identity_vertex: worst,
        max_implied_mass: max_implied,
        min_cluster_mass: min_cluster,
        pass,
    }
}
