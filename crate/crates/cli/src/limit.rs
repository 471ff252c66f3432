//! Convergence harness: runs models against the obstacle-problem reference
//! across a range of levels and reports margins, exponents, and mass checks.

use std::path::PathBuf;

use clap::Args;
use gasket_core::fields::{discretize, discretize_floor, DensitySpec};
use gasket_core::gasket::{GasketLevel, Vertex};
use gasket_core::limits::{
    ball_volume_series, boundary_measure_estimate, containment_margins, exponent_fit,
    exit_time_series, mass_conservation_check, symmetric_difference_measure,
    ClusterGeometry,
};
use gasket_core::sandpile::{stabilize, SweepOrder, DEFAULT_TOL};
use gasket_core::{idla, obstacle, rotor, Error, Result, ALPHA, BETA};
use serde::Serialize;

use crate::{load_density, report_string, resolve_seed, write_text};

#[derive(Args)]
pub struct LimitArgs {
    #[arg(long)]
    density: PathBuf,
    /// Comma-separated subset of sandpile,rotor,idla.
    #[arg(long, default_value = "sandpile")]
    models: String,
    /// Level range as lo:hi, inclusive.
    #[arg(long)]
    levels: String,
    /// Seed for the walks; drawn from entropy and printed if absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    trials: u32,
    #[arg(long = "domain-L")]
    domain_l: Option<u32>,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Model {
    Sandpile,
    Rotor,
    Idla,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Sandpile => "sandpile",
            Model::Rotor => "rotor",
            Model::Idla => "idla",
        }
    }
}

fn parse_models(s: &str) -> Result<Vec<Model>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let m = match part.trim() {
            "sandpile" => Model::Sandpile,
            "rotor" => Model::Rotor,
            "idla" => Model::Idla,
            other => {
                return Err(Error::Config(format!(
                    "unknown model {other:?}, expected sandpile, rotor, or idla"
                )))
            }
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("--models selects nothing".into()));
    }
    Ok(out)
}

fn parse_levels(s: &str) -> Result<(u32, u32)> {
    let parse = |t: &str| {
        t.parse::<u32>()
            .map_err(|_| Error::Config(format!("bad level {t:?} in --levels")))
    };
    let (lo, hi) = match s.split_once(':') {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(Error::Config(format!("--levels {s} is not an increasing range")));
    }
    Ok((lo, hi))
}

#[derive(Serialize)]
struct LimitReport<'a> {
    version: &'static str,
    config: LimitConfig<'a>,
    levels: Vec<LevelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponents: Option<ExponentReport>,
    boundary: BoundaryReport,
    criteria: Criteria,
}

#[derive(Serialize)]
struct LimitConfig<'a> {
    density_path: &'a PathBuf,
    density: &'a DensitySpec,
    domain_log2: u32,
    levels: (u32, u32),
    models: Vec<&'static str>,
    trials: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize)]
struct LevelReport {
    level: u32,
    vertex_count: usize,
    reference_size: usize,
    reference_measure: f64,
    models: Vec<ModelReport>,
}

#[derive(Serialize)]
struct ModelReport {
    model: &'static str,
    cluster_size: usize,
    eps_in: f64,
    eps_out: f64,
    sym_diff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass: Option<MassBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    idla: Option<IdlaBlock>,
}

#[derive(Serialize)]
struct MassBlock {
    cluster_measure: f64,
    mass_measure: f64,
    rel_gap: f64,
    pass: bool,
}

#[derive(Serialize)]
struct IdlaBlock {
    trials: usize,
    max_eps_in: f64,
    max_eps_out: f64,
    q90_eps_in: f64,
    q90_eps_out: f64,
}

#[derive(Serialize)]
struct ExponentReport {
    level: u32,
    radii: Vec<u32>,
    alpha: FitBlock,
    beta: FitBlock,
}

#[derive(Serialize)]
struct FitBlock {
    slope: f64,
    half_width: f64,
    target: f64,
    within_5pct: bool,
}

#[derive(Serialize)]
struct BoundaryReport {
    level: u32,
    scales: Vec<i32>,
    estimates: Vec<f64>,
    nonincreasing: bool,
}

#[derive(Serialize)]
struct Criteria {
    margins_decrease: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_within_5pct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_within_5pct: Option<bool>,
    boundary_nonincreasing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass_pass: Option<bool>,
}

fn fit_block(series: &[(f64, f64)], target: f64) -> Result<FitBlock> {
    let fit = exponent_fit(series)?;
    Ok(FitBlock {
        slope: fit.slope,
        half_width: fit.half_width,
        target,
        within_5pct: (fit.slope - target).abs() / target < 0.05,
    })
}

pub fn run(a: &LimitArgs) -> Result<()> {
    let (spec, density) = load_density(&a.density, a.domain_l)?;
    let models = parse_models(&a.models)?;
    let (lo, hi) = parse_levels(&a.levels)?;
    if a.trials == 0 {
        return Err(Error::Config("--trials must be positive".into()));
    }
    let seed = models.contains(&Model::Idla).then(|| resolve_seed(a.seed));
    let domain_l = density.bound_log2;

    let mut levels = Vec::new();
    let mut boundary = None;
    let mut exponents = None;
    for n in lo..=hi {
        let g = GasketLevel::new(n, domain_l);
        let sigma = discretize(&density, &g)?;
        let problem = obstacle::solve(&g, &sigma)?;
        let reference = &problem.cluster_full;
        let ref_geom = ClusterGeometry::new(&g, reference);
        let ref_cells = ref_geom.cell_cover(n as i32);

        let mut model_reports = Vec::new();
        for &model in &models {
            let report = match model {
                Model::Sandpile => {
                    let state = stabilize(&g, &sigma, DEFAULT_TOL, SweepOrder::Lex)?;
                    let cluster = state.cluster();
                    let margins = containment_margins(&g, &cluster, &ref_cells);
                    let mass = mass_conservation_check(&g, &sigma, &cluster);
                    ModelReport {
                        model: model.name(),
                        cluster_size: cluster.len(),
                        eps_in: margins.eps_in,
                        eps_out: margins.eps_out,
                        sym_diff: symmetric_difference_measure(
                            &ClusterGeometry::new(&g, &cluster),
                            &ref_geom,
                        )?,
                        mass: Some(MassBlock {
                            cluster_measure: mass.cluster_measure,
                            mass_measure: mass.mass_measure,
                            rel_gap: mass.rel_gap,
                            pass: mass.pass,
                        }),
                        idla: None,
                    }
                }
                Model::Rotor => {
                    let particles = discretize_floor(&density, &g)?;
                    let state =
                        rotor::aggregate(&g, &particles, rotor::RotorInit::Zero, SweepOrder::Lex)?;
                    let cluster = state.cluster();
                    let margins = containment_margins(&g, &cluster, &ref_cells);
                    ModelReport {
                        model: model.name(),
                        cluster_size: cluster.len(),
                        eps_in: margins.eps_in,
                        eps_out: margins.eps_out,
                        sym_diff: symmetric_difference_measure(
                            &ClusterGeometry::new(&g, &cluster),
                            &ref_geom,
                        )?,
                        mass: None,
                        idla: None,
                    }
                }
                Model::Idla => {
                    let particles = discretize_floor(&density, &g)?;
                    let seed = seed.expect("seed resolved when idla selected");
                    let runs: Vec<idla::IdlaRun> = (0..a.trials)
                        .map(|t| idla::idla_aggregate(&g, &particles, seed, t, None))
                        .collect::<Result<_>>()?;
                    let stats = idla::idla_statistics(&g, &runs, reference)?;
                    let size =
                        runs.iter().map(|r| r.cluster().len()).sum::<usize>() / runs.len();
                    ModelReport {
                        model: model.name(),
                        cluster_size: size,
                        eps_in: stats.mean_eps_in,
                        eps_out: stats.mean_eps_out,
                        sym_diff: stats.mean_sym_diff,
                        mass: None,
                        idla: Some(IdlaBlock {
                            trials: stats.trials,
                            max_eps_in: stats.max_eps_in,
                            max_eps_out: stats.max_eps_out,
                            q90_eps_in: stats.q90_eps_in,
                            q90_eps_out: stats.q90_eps_out,
                        }),
                    }
                }
            };
            model_reports.push(report);
        }
        levels.push(LevelReport {
            level: n,
            vertex_count: g.vertex_count(),
            reference_size: reference.len(),
            reference_measure: reference.len() as f64 * (3.0f64).powi(-(n as i32)),
            models: model_reports,
        });

        if n == hi {
            let k_lo = (n as i32 - 3).max(-(domain_l as i32));
            let estimates = boundary_measure_estimate(&g, &ref_cells, k_lo, n as i32);
            boundary = Some(BoundaryReport {
                level: n,
                scales: (k_lo..=n as i32).collect(),
                nonincreasing: estimates.windows(2).all(|w| w[1] <= w[0] + 1e-12),
                estimates,
            });

            let side = 1u32 << (domain_l + n);
            let radii: Vec<u32> = [side / 16, side / 8, side / 4, side / 2]
                .into_iter()
                .filter(|&r| r >= 1)
                .collect();
            if radii.len() >= 3 {
                let volumes = ball_volume_series(&g, Vertex::origin(), &radii)?;
                let times = exit_time_series(&g, Vertex::origin(), &radii)?;
                exponents = Some(ExponentReport {
                    level: n,
                    radii,
                    alpha: fit_block(&volumes, ALPHA)?,
                    beta: fit_block(&times, BETA)?,
                });
            }
        }
    }

    let margins_decrease = levels.len() < 2
        || levels.first().unwrap().models.iter().zip(&levels.last().unwrap().models).all(
            |(first, last)| {
                last.eps_in <= first.eps_in + 1e-12 && last.eps_out <= first.eps_out + 1e-12
            },
        );
    let last_mass = levels
        .last()
        .and_then(|l| l.models.iter().find_map(|m| m.mass.as_ref().map(|b| b.pass)));
    let boundary = boundary.expect("at least one level runs");
    let criteria = Criteria {
        margins_decrease,
        alpha_within_5pct: exponents.as_ref().map(|e| e.alpha.within_5pct),
        beta_within_5pct: exponents.as_ref().map(|e| e.beta.within_5pct),
        boundary_nonincreasing: boundary.nonincreasing,
        mass_pass: last_mass,
    };

    let report = LimitReport {
        version: env!("CARGO_PKG_VERSION"),
        config: LimitConfig {
            density_path: &a.density,
            density: &spec,
            domain_log2: domain_l,
            levels: (lo, hi),
            models: models.iter().map(|m| m.name()).collect(),
            trials: a.trials,
            seed,
        },
        levels,
        exponents,
        boundary,
        criteria,
    };
    write_text(&a.report, &report_string(&report))?;
    println!(
        "limit: levels {lo}:{hi} models {} report {}",
        a.models,
        a.report.display()
    );
    Ok(())
}
