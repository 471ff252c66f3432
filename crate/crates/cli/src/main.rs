//! `gasket`: aggregation models, the obstacle solver, and convergence
//! reports on gasket graphs. Exit codes: 0 success, 1 model or domain
//! failure, 2 bad configuration or unreadable input.

mod limit;
mod models;
mod render_cmd;
mod selftest;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gasket_core::fields::{Density, DensitySpec};
use gasket_core::{Error, Result};

#[derive(Parser)]
#[command(name = "gasket", version, about = "Aggregation models on gasket graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stabilize a divisible sandpile and write its cluster and odometer.
    Sandpile(models::SandpileArgs),
    /// Run rotor-router aggregation and write its cluster and edge flux.
    Rotor(models::RotorArgs),
    /// Run IDLA trials and write per-trial clusters and statistics.
    Idla(models::IdlaArgs),
    /// Solve the discrete obstacle problem for a density.
    Obstacle(models::ObstacleArgs),
    /// Compare model clusters against the obstacle solution across levels.
    Limit(limit::LimitArgs),
    /// Render cluster CSV files as a layered SVG.
    Render(render_cmd::RenderArgs),
    /// Run the exact-identity suite and exit nonzero on any failure.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Sandpile(a) => models::sandpile(a),
        Cmd::Rotor(a) => models::rotor(a),
        Cmd::Idla(a) => models::idla(a),
        Cmd::Obstacle(a) => models::obstacle(a),
        Cmd::Limit(a) => limit::run(a),
        Cmd::Render(a) => render_cmd::run(a),
        Cmd::Selftest => selftest::run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Density(_) | Error::Io(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Load a density spec, optionally overriding its domain bound. The
/// override may only enlarge the domain.
fn load_density(path: &Path, domain_l: Option<u32>) -> Result<(DensitySpec, Density)> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read density file {}: {e}", path.display()))
    })?;
    let mut spec: DensitySpec = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("density file {}: {e}", path.display())))?;
    if let Some(l) = domain_l {
        if l < spec.bound_log2 {
            return Err(Error::Config(format!(
                "--domain-L {l} is smaller than the density bound {}",
                spec.bound_log2
            )));
        }
        spec.bound_log2 = l;
    }
    let density = Density::from_spec(&spec)?;
    Ok((spec, density))
}

/// Use the given seed, or draw one from entropy and print it so the run
/// can be reproduced.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        println!("seed: {s}");
        s
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn report_string<T: serde::Serialize>(report: &T) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}
