//! The four model subcommands: each runs one solver and writes cluster
//! CSVs and a JSON report embedding the resolved configuration.

use std::path::PathBuf;

use clap::Args;
use gasket_core::fields::{discretize, discretize_floor, DensitySpec};
use gasket_core::gasket::{GasketLevel, Half};
use gasket_core::green::GreenTable;
use gasket_core::harmonic::spow;
use gasket_core::closed_form::ExactObstacle;
use gasket_core::sandpile::{stabilize, stabilize_auto, SweepOrder, DEFAULT_TOL};
use gasket_core::{idla, io, obstacle, rotor, Error, Result};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::{load_density, report_string, resolve_seed, write_text};

fn point_measure(n: u32, count: usize) -> f64 {
    count as f64 * (3.0f64).powi(-(n as i32))
}

#[derive(Args)]
pub struct SandpileArgs {
    #[arg(long)]
    level: u32,
    #[arg(long)]
    density: PathBuf,
    /// Stop when total excess falls below tol times the initial mass.
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed domain bound; without it the domain auto-grows on boundary
    /// contact.
    #[arg(long = "domain-L")]
    domain_l: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    odometer: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct SandpileReport<'a> {
    version: &'static str,
    config: SandpileConfig<'a>,
    vertex_count: usize,
    sweeps: u64,
    total_excess: f64,
    cluster_size: usize,
    cluster_measure: f64,
    odometer_max: f64,
}

#[derive(Serialize)]
struct SandpileConfig<'a> {
    level: u32,
    domain_log2: u32,
    density_path: &'a PathBuf,
    density: &'a DensitySpec,
    tol: f64,
    sweep_order: &'static str,
}

pub fn sandpile(a: &SandpileArgs) -> Result<()> {
    let (mut spec, density) = load_density(&a.density, a.domain_l)?;
    let tol = a.tol.unwrap_or(DEFAULT_TOL);
    let (g, state) = if a.domain_l.is_some() {
        let g = GasketLevel::new(a.level, density.bound_log2);
        let sigma = discretize(&density, &g)?;
        let state = stabilize(&g, &sigma, tol, SweepOrder::Lex)?;
        (g, state)
    } else {
        stabilize_auto(&density, a.level, tol, SweepOrder::Lex)?
    };
    spec.bound_log2 = g.domain_log2();
    let cluster = state.cluster();
    let odometer = state.odometer();
    if let Some(p) = &a.out {
        write_text(p, &io::cluster_to_csv(&g, &cluster))?;
    }
    if let Some(p) = &a.odometer {
        write_text(p, &io::field_to_csv(&g, &odometer))?;
    }
    if let Some(p) = &a.report {
        let report = SandpileReport {
            version: env!("CARGO_PKG_VERSION"),
            config: SandpileConfig {
                level: a.level,
                domain_log2: g.domain_log2(),
                density_path: &a.density,
                density: &spec,
                tol,
                sweep_order: "lex",
            },
            vertex_count: g.vertex_count(),
            sweeps: state.sweeps,
            total_excess: state.total_excess(),
            cluster_size: cluster.len(),
            cluster_measure: point_measure(g.n(), cluster.len()),
            odometer_max: odometer.iter().copied().fold(0.0, f64::max),
        };
        write_text(p, &report_string(&report))?;
    }
    println!(
        "sandpile: level {} domain_L {} cluster {} sweeps {}",
        a.level,
        g.domain_log2(),
        cluster.len(),
        state.sweeps
    );
    Ok(())
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum RotorsArg {
    Zero,
    Random,
}

#[derive(Args)]
pub struct RotorArgs {
    #[arg(long)]
    level: u32,
    #[arg(long)]
    density: PathBuf,
    /// Initial rotor directions.
    #[arg(long, value_enum, default_value = "zero")]
    rotors: RotorsArg,
    /// Seed for random rotors; drawn from entropy and printed if absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "domain-L")]
    domain_l: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Edge flux CSV: one `theta`/`rho` row per directed edge.
    #[arg(long)]
    flux: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct RotorReport<'a> {
    version: &'static str,
    config: RotorConfig<'a>,
    vertex_count: usize,
    particles: u64,
    cluster_size: usize,
    cluster_measure: f64,
    max_abs_rho: i64,
    divergence_matches_load: bool,
}

#[derive(Serialize)]
struct RotorConfig<'a> {
    level: u32,
    domain_log2: u32,
    density_path: &'a PathBuf,
    density: &'a DensitySpec,
    rotors: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    release_order: &'static str,
}

fn half_char(h: Half) -> char {
    match h {
        Half::Plus => '+',
        Half::Minus => '-',
    }
}

fn flux_csv(g: &GasketLevel, theta: &[[i64; 4]], rho: &[[i64; 4]]) -> String {
    use std::fmt::Write as _;
    let mut out = format!("# level={} domain_L={}\n", g.n(), g.domain_log2());
    for i in 0..g.vertex_count() as u32 {
        let v = g.vertex(i);
        for (slot, &j) in g.neighbors(i).iter().enumerate() {
            let w = g.vertex(j);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                half_char(v.half),
                v.a,
                v.b,
                half_char(w.half),
                w.a,
                w.b,
                theta[i as usize][slot],
                rho[i as usize][slot]
            );
        }
    }
    out
}

pub fn rotor(a: &RotorArgs) -> Result<()> {
    let (mut spec, density) = load_density(&a.density, a.domain_l)?;
    let (init, seed) = match a.rotors {
        RotorsArg::Zero => (rotor::RotorInit::Zero, None),
        RotorsArg::Random => {
            let s = resolve_seed(a.seed);
            (rotor::RotorInit::Random { seed: s }, Some(s))
        }
    };
    let (g, sigma, state) = if a.domain_l.is_some() {
        let g = GasketLevel::new(a.level, density.bound_log2);
        let sigma = discretize_floor(&density, &g)?;
        let state = rotor::aggregate(&g, &sigma, init, SweepOrder::Lex)?;
        (g, sigma, state)
    } else {
        rotor::aggregate_auto(&density, a.level, init, SweepOrder::Lex)?
    };
    spec.bound_log2 = g.domain_log2();
    let cluster = state.cluster();
    if let Some(p) = &a.out {
        write_text(p, &io::cluster_to_csv(&g, &cluster))?;
    }
    let theta = rotor::flux_theta(&g, &state);
    let rho = rotor::flux_rho(&g, &state);
    if let Some(p) = &a.flux {
        write_text(p, &flux_csv(&g, &theta, &rho))?;
    }
    if let Some(p) = &a.report {
        let divergence = rotor::divergence_theta(&g, &state);
        let in_cluster = {
            let mut m = vec![false; g.vertex_count()];
            for &i in &cluster {
                m[i as usize] = true;
            }
            m
        };
        let matches = divergence.iter().enumerate().all(|(i, &d)| {
            let expect = sigma.counts[i] as i64 - i64::from(in_cluster[i]);
            d == expect
        });
        let report = RotorReport {
            version: env!("CARGO_PKG_VERSION"),
            config: RotorConfig {
                level: a.level,
                domain_log2: g.domain_log2(),
                density_path: &a.density,
                density: &spec,
                rotors: match a.rotors {
                    RotorsArg::Zero => "zero",
                    RotorsArg::Random => "random",
                },
                seed,
                release_order: "lex",
            },
            vertex_count: g.vertex_count(),
            particles: sigma.total(),
            cluster_size: cluster.len(),
            cluster_measure: point_measure(g.n(), cluster.len()),
            max_abs_rho: rho.iter().flatten().map(|r| r.abs()).max().unwrap_or(0),
            divergence_matches_load: matches,
        };
        write_text(p, &report_string(&report))?;
    }
    println!(
        "rotor: level {} domain_L {} particles {} cluster {}",
        a.level,
        g.domain_log2(),
        sigma.total(),
        cluster.len()
    );
    Ok(())
}

#[derive(Args)]
pub struct IdlaArgs {
    #[arg(long)]
    level: u32,
    #[arg(long)]
    density: PathBuf,
    /// Seed for the walks; drawn from entropy and printed if absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    trials: u32,
    #[arg(long)]
    step_cap: Option<u64>,
    #[arg(long = "domain-L")]
    domain_l: Option<u32>,
    /// Directory for per-trial cluster CSVs (trial_000.csv, ...).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Reference cluster CSV; adds containment statistics to the report.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct IdlaReport<'a> {
    version: &'static str,
    config: IdlaConfig<'a>,
    trials: Vec<IdlaTrialReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    statistics: Option<idla::IdlaStatistics>,
}

#[derive(Serialize)]
struct IdlaConfig<'a> {
    level: u32,
    density_path: &'a PathBuf,
    density: &'a DensitySpec,
    seed: u64,
    trials: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    domain_log2: Option<u32>,
}

#[derive(Serialize)]
struct IdlaTrialReport {
    trial: u32,
    domain_log2: u32,
    particles: u64,
    cluster_size: usize,
    cluster_measure: f64,
    total_steps: u64,
    mean_rescaled_steps: f64,
}

pub fn idla(a: &IdlaArgs) -> Result<()> {
    let (spec, density) = load_density(&a.density, a.domain_l)?;
    if a.trials == 0 {
        return Err(Error::Config("--trials must be positive".into()));
    }
    let seed = resolve_seed(a.seed);
    let runs: Vec<(GasketLevel, _, idla::IdlaRun)> = if a.domain_l.is_some() {
        let mut out = Vec::new();
        for t in 0..a.trials {
            let g = GasketLevel::new(a.level, density.bound_log2);
            let sigma = discretize_floor(&density, &g)?;
            let run = idla::idla_aggregate(&g, &sigma, seed, t, a.step_cap)?;
            out.push((g, sigma, run));
        }
        out
    } else {
        idla::idla_trials(&density, a.level, seed, a.trials, a.step_cap)?
    };

    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| {
            Error::Config(format!("cannot create {}: {e}", dir.display()))
        })?;
        for (g, _, run) in &runs {
            let path = dir.join(format!("trial_{:03}.csv", run.trial));
            write_text(&path, &io::cluster_to_csv(g, &run.cluster()))?;
        }
    }

    let statistics = match &a.reference {
        None => None,
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read reference {}: {e}", path.display()))
            })?;
            let file = io::cluster_from_csv(&text)?;
            let g = GasketLevel::new(file.n, file.domain_log2);
            let reference = file.indices(&g)?;
            let matching: Vec<idla::IdlaRun> = runs
                .iter()
                .filter(|(rg, _, _)| {
                    rg.n() == file.n && rg.domain_log2() == file.domain_log2
                })
                .map(|(_, _, run)| run.clone())
                .collect();
            if matching.is_empty() {
                return Err(Error::Config(format!(
                    "no trial ran at the reference context level={} domain_L={}",
                    file.n, file.domain_log2
                )));
            }
            Some(idla::idla_statistics(&g, &matching, &reference)?)
        }
    };

    if let Some(p) = &a.report {
        let report = IdlaReport {
            version: env!("CARGO_PKG_VERSION"),
            config: IdlaConfig {
                level: a.level,
                density_path: &a.density,
                density: &spec,
                seed,
                trials: a.trials,
                step_cap: a.step_cap,
                domain_log2: a.domain_l.map(|_| density.bound_log2),
            },
            trials: runs
                .iter()
                .map(|(g, _, run)| IdlaTrialReport {
                    trial: run.trial,
                    domain_log2: g.domain_log2(),
                    particles: run.particles(),
                    cluster_size: run.cluster().len(),
                    cluster_measure: point_measure(g.n(), run.cluster().len()),
                    total_steps: run.total_steps(),
                    mean_rescaled_steps: run.mean_rescaled_steps(),
                })
                .collect(),
            statistics,
        };
        write_text(p, &report_string(&report))?;
    }
    let settled: u64 = runs.iter().map(|(_, _, r)| r.particles()).sum();
    println!("idla: level {} trials {} particles {}", a.level, a.trials, settled);
    Ok(())
}

#[derive(Args)]
pub struct ObstacleArgs {
    #[arg(long)]
    level: u32,
    #[arg(long)]
    density: PathBuf,
    #[arg(long = "domain-L")]
    domain_l: Option<u32>,
    /// Odometer CSV over all vertices.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noncoincidence-set CSV (odometer support plus saturated sources).
    #[arg(long)]
    cluster: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Dump the dense Green table as a CSV matrix (small graphs only).
    #[arg(long)]
    dump_green: Option<PathBuf>,
}

#[derive(Serialize)]
struct ObstacleReport<'a> {
    version: &'static str,
    config: ObstacleConfig<'a>,
    vertex_count: usize,
    sweeps: u64,
    residual: f64,
    odometer_support: usize,
    cluster_size: usize,
    cluster_measure: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
}

#[derive(Serialize)]
struct ObstacleConfig<'a> {
    level: u32,
    domain_log2: u32,
    density_path: &'a PathBuf,
    density: &'a DensitySpec,
}

#[derive(Serialize)]
struct OracleReport {
    source_log2: u32,
    cluster_log2: u32,
    junctions: usize,
    max_rel_err: f64,
}

/// Detect the closed-form family 3^{L-l}·1_B(0,2^l) on B(0,2^{L+1}).
fn detect_oracle(density: &gasket_core::fields::Density) -> Option<ExactObstacle> {
    if density.terms.len() != 1 || density.bound_log2 < 1 {
        return None;
    }
    let (coeff, ball) = &density.terms[0];
    if ball.radius_log2 < 0 || ball.cells.len() != 2 {
        return None;
    }
    if ball.cells.iter().any(|c| c.a != 0 || c.b != 0) {
        return None;
    }
    let source = ball.radius_log2 as u32;
    let cluster = density.bound_log2 - 1;
    if cluster < source {
        return None;
    }
    let expect: BigRational = spow(3, (cluster - source) as i32);
    (*coeff == expect).then(|| ExactObstacle::new(source, cluster))
}

pub fn obstacle(a: &ObstacleArgs) -> Result<()> {
    let (mut spec, density) = load_density(&a.density, a.domain_l)?;
    let g = GasketLevel::new(a.level, density.bound_log2);
    let sigma = discretize(&density, &g)?;
    let problem = obstacle::solve(&g, &sigma)?;
    spec.bound_log2 = g.domain_log2();
    if let Some(p) = &a.out {
        write_text(p, &io::field_to_csv(&g, &problem.odometer))?;
    }
    if let Some(p) = &a.cluster {
        write_text(p, &io::cluster_to_csv(&g, &problem.cluster_full))?;
    }
    if let Some(p) = &a.dump_green {
        let interior = g.interior_indices();
        if interior.len() > 2000 {
            return Err(Error::Config(format!(
                "green dump limited to 2000 interior vertices, graph has {}",
                interior.len()
            )));
        }
        let table = GreenTable::build(&g);
        let rows: Vec<Vec<f64>> = interior
            .iter()
            .map(|&x| interior.iter().map(|&y| table.green(x, y)).collect())
            .collect();
        write_text(p, &io::matrix_to_csv(&rows))?;
    }
    let oracle = detect_oracle(&density).map(|e| {
        let rescale = 4.0 / 3.0;
        let junctions = e.junction_values(g.n());
        let max_rel_err = junctions
            .iter()
            .map(|(v, exact)| {
                let exact = exact.to_f64().unwrap();
                let i = g.require_index(*v).expect("junction on lattice") as usize;
                (rescale * problem.gamma[i] - exact).abs() / exact
            })
            .fold(0.0, f64::max);
        OracleReport {
            source_log2: e.source_log2,
            cluster_log2: e.cluster_log2,
            junctions: junctions.len(),
            max_rel_err,
        }
    });
    if let Some(p) = &a.report {
        let report = ObstacleReport {
            version: env!("CARGO_PKG_VERSION"),
            config: ObstacleConfig {
                level: a.level,
                domain_log2: g.domain_log2(),
                density_path: &a.density,
                density: &spec,
            },
            vertex_count: g.vertex_count(),
            sweeps: problem.sweeps,
            residual: problem.residual,
            odometer_support: problem.cluster.len(),
            cluster_size: problem.cluster_full.len(),
            cluster_measure: point_measure(g.n(), problem.cluster_full.len()),
            oracle,
        };
        write_text(p, &report_string(&report))?;
    }
    println!(
        "obstacle: level {} domain_L {} cluster {} sweeps {}",
        a.level,
        g.domain_log2(),
        problem.cluster_full.len(),
        problem.sweeps
    );
    Ok(())
}
