//! Internal DLA with seedable, per-particle random streams.
//!
//! Each particle walks from its source, uniform over the four neighbors,
//! until it first reaches an unoccupied site, which it then occupies. The
//! walk of particle k in trial t is drawn from an independent chacha12
//! stream keyed by (seed, t, k), so growing the domain and replaying a
//! trial reuses identical step sequences.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::fields::{discretize_floor, Density, ParticleField};
use crate::gasket::GasketLevel;
use crate::{beta_scale, Error, Result};

/// Algorithm name recorded in reports.
pub const RNG_NAME: &str = "chacha12";

fn trial_seed(seed: u64, trial: u32) -> u64 {
    // splitmix64 finalizer over the (seed, trial) pair.
    let mut z = seed ^ (u64::from(trial).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one particle: one generator per (seed, trial),
/// particle index as the stream counter.
fn particle_rng(seed: u64, trial: u32, particle: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(trial_seed(seed, trial));
    rng.set_stream(particle);
    rng
}

#[derive(Clone, Debug)]
pub struct IdlaRun {
    n: u32,
    domain_log2: u32,
    pub seed: u64,
    pub trial: u32,
    pub occupied: Vec<bool>,
    /// Walk length of each particle in release order.
    pub step_counts: Vec<u64>,
    /// Settling site of each particle in release order.
    pub settled: Vec<u32>,
}

impl IdlaRun {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn domain_log2(&self) -> u32 {
        self.domain_log2
    }

    pub fn particles(&self) -> u64 {
        self.settled.len() as u64
    }

    /// Occupied indices (the cluster I_n).
    pub fn cluster(&self) -> Vec<u32> {
        (0..self.occupied.len() as u32)
            .filter(|&i| self.occupied[i as usize])
            .collect()
    }

    pub fn total_steps(&self) -> u64 {
        self.step_counts.iter().sum()
    }

    /// Mean rescaled walk duration 5^{-n} * steps.
    pub fn mean_rescaled_steps(&self) -> f64 {
        if self.step_counts.is_empty() {
            return 0.0;
        }
        beta_scale(self.n) * self.total_steps() as f64 / self.step_counts.len() as f64
    }
}

/// Release sigma(x) particles from each source in enumeration order.
/// Errors with [`Error::BoundaryContact`] when any walk touches the domain
/// boundary and with [`Error::StepCap`] when a single walk exceeds the cap.
pub fn idla_aggregate(
    g: &GasketLevel,
    sigma: &ParticleField,
    seed: u64,
    trial: u32,
    step_cap: Option<u64>,
) -> Result<IdlaRun> {
    assert!(sigma.n == g.n() && sigma.domain_log2 == g.domain_log2());
    let mut run = IdlaRun {
        n: g.n(),
        domain_log2: g.domain_log2(),
        seed,
        trial,
        occupied: vec![false; g.vertex_count()],
        step_counts: Vec::new(),
        settled: Vec::new(),
    };
    let mut particle = 0u64;
    for i in 0..g.vertex_count() as u32 {
        for _ in 0..sigma.counts[i as usize] {
            let mut rng = particle_rng(seed, trial, particle);
            particle += 1;
            let mut p = i;
            let mut steps = 0u64;
            loop {
                if g.is_boundary(p) {
                    return Err(Error::BoundaryContact { vertex: g.vertex(p) });
                }
                if !run.occupied[p as usize] {
                    run.occupied[p as usize] = true;
                    run.step_counts.push(steps);
                    run.settled.push(p);
                    break;
                }
                if step_cap.is_some_and(|cap| steps >= cap) {
                    return Err(Error::StepCap { cap: step_cap.unwrap() });
                }
                let dir = (rng.next_u32() >> 30) as usize;
                p = g.neighbors(p)[dir];
                steps += 1;
            }
        }
    }
    Ok(run)
}

/// Aggregate, growing the domain by one dyadic step (up to three) and
/// restarting the trial whenever a walk reaches the boundary. Particle
/// streams are keyed by (seed, trial, particle), so restarts replay the
/// same walks on the larger graph.
pub fn idla_aggregate_auto(
    density: &Density,
    n: u32,
    seed: u64,
    trial: u32,
    step_cap: Option<u64>,
) -> Result<(GasketLevel, ParticleField, IdlaRun)> {
    let start = density.bound_log2;
    for growth in 0..=3 {
        let g = GasketLevel::new(n, start + growth);
        let sigma = discretize_floor(density, &g)?;
        match idla_aggregate(&g, &sigma, seed, trial, step_cap) {
            Err(Error::BoundaryContact { vertex }) => {
                if growth == 3 {
                    return Err(Error::BoundaryContact { vertex });
                }
            }
            other => return other.map(|r| (g, sigma, r)),
        }
    }
    unreachable!()
}

/// Run trials 0..trials in parallel, each through the auto-grow driver.
/// Thread count comes from GASKET_THREADS when set, else the machine's
/// parallelism. Results are in trial order.
pub fn idla_trials(
    density: &Density,
    n: u32,
    seed: u64,
    trials: u32,
    step_cap: Option<u64>,
) -> Result<Vec<(GasketLevel, ParticleField, IdlaRun)>> {
    let workers = std::env::var("GASKET_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
        });
    let mut results: Vec<Option<Result<(GasketLevel, ParticleField, IdlaRun)>>> =
        (0..trials).map(|_| None).collect();
    let next = std::sync::atomic::AtomicU32::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..workers.min(trials as usize) {
            scope.spawn(|| loop {
                let t = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if t >= trials {
                    return;
                }
                let out = idla_aggregate_auto(density, n, seed, t, step_cap);
                slots.lock().unwrap()[t as usize] = Some(out);
            });
        }
    });
    results.into_iter().map(|r| r.expect("worker filled every slot")).collect()
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct IdlaStatistics {
    pub n: u32,
    pub domain_log2: u32,
    pub trials: usize,
    /// Per-trial rescaled symmetric difference against the reference.
    pub sym_diff: Vec<f64>,
    /// Per-trial inner margin: the largest distance from a missed reference
    /// vertex to the cluster.
    pub eps_in: Vec<f64>,
    /// Per-trial outer margin: how far past the reference the cluster
    /// reaches.
    pub eps_out: Vec<f64>,
    pub mean_sym_diff: f64,
    pub mean_eps_in: f64,
    pub mean_eps_out: f64,
    pub max_eps_in: f64,
    pub max_eps_out: f64,
    pub q90_eps_in: f64,
    pub q90_eps_out: f64,
}

fn upper_quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Per-trial and aggregate comparison of IDLA clusters against a reference
/// vertex set, using the same one-sided Hausdorff margins as
/// `limits::containment_margins`: the outer margin is the largest distance
/// from a cluster vertex to the reference set, the inner margin the
/// largest distance from a missed reference vertex to the cluster. Errors
/// when a run's graph context differs from `g`.
pub fn idla_statistics(
    g: &GasketLevel,
    runs: &[IdlaRun],
    reference: &[u32],
) -> Result<IdlaStatistics> {
    if runs.is_empty() {
        return Err(Error::Config("statistics need at least one run".into()));
    }
    for r in runs {
        if r.n() != g.n() || r.domain_log2() != g.domain_log2() {
            return Err(Error::Config(format!(
                "run context {}x{} does not match graph {}x{}",
                r.n(),
                r.domain_log2(),
                g.n(),
                g.domain_log2()
            )));
        }
    }
    let n = g.n();
    let mut ref_sorted = reference.to_vec();
    ref_sorted.sort_unstable();
    ref_sorted.dedup();
    let mut in_ref = vec![false; g.vertex_count()];
    for &i in &ref_sorted {
        in_ref[i as usize] = true;
    }
    let min_dist = |v: u32, set: &[u32]| -> f64 {
        set.iter()
            .map(|&w| crate::limits::planar_distance(g.vertex(v), g.vertex(w), n))
            .fold(f64::INFINITY, f64::min)
    };

    let ref_geo = crate::limits::ClusterGeometry::new(g, &ref_sorted);
    let mut sym_diff = Vec::with_capacity(runs.len());
    let mut eps_in = Vec::with_capacity(runs.len());
    let mut eps_out = Vec::with_capacity(runs.len());
    for r in runs {
        let cluster = r.cluster();
        let geo = crate::limits::ClusterGeometry::new(g, &cluster);
        sym_diff.push(crate::limits::symmetric_difference_measure(&geo, &ref_geo)?);
        let mut out = 0.0f64;
        for &i in &cluster {
            if !in_ref[i as usize] {
                out = out.max(min_dist(i, &ref_sorted));
            }
        }
        eps_out.push(out);
        let in_cluster: Vec<bool> = {
            let mut m = vec![false; g.vertex_count()];
            for &i in &cluster {
                m[i as usize] = true;
            }
            m
        };
        let mut inn = 0.0f64;
        for &i in &ref_sorted {
            if !in_cluster[i as usize] {
                inn = inn.max(min_dist(i, &cluster));
            }
        }
        eps_in.push(inn);
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &[f64]| v.iter().copied().fold(0.0f64, f64::max);
    Ok(IdlaStatistics {
        n,
        domain_log2: g.domain_log2(),
        trials: runs.len(),
        mean_sym_diff: mean(&sym_diff),
        mean_eps_in: mean(&eps_in),
        mean_eps_out: mean(&eps_out),
        max_eps_in: max(&eps_in),
        max_eps_out: max(&eps_out),
        q90_eps_in: upper_quantile(&eps_in, 0.9),
        q90_eps_out: upper_quantile(&eps_out, 0.9),
        sym_diff,
        eps_in,
        eps_out,
    })
}
