//! End-to-end runs of the gasket binary: exit codes, output files, and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gasket() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gasket"))
}

fn write_ball3(dir: &Path) -> PathBuf {
    let path = dir.join("ball3.json");
    std::fs::write(
        &path,
        r#"{"bound_L": 2, "terms": [{"coeff": "3",
            "center": {"half": "+", "a": 0, "b": 0, "level": 0},
            "radius_log2": 0}]}"#,
    )
    .unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn selftest_passes() {
    let out = run_ok(gasket().arg("selftest"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0 failures"), "{text}");
}

#[test]
fn missing_density_file_exits_two_and_names_the_path() {
    let out = gasket()
        .args(["sandpile", "--level", "2", "--density", "/nonexistent/sigma.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("/nonexistent/sigma.json"), "{err}");
}

#[test]
fn unknown_flag_exits_two() {
    let out = gasket().args(["selftest", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undersized_domain_override_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let density = write_ball3(dir.path());
    let out = gasket()
        .args(["sandpile", "--level", "2", "--domain-L", "1"])
        .arg("--density")
        .arg(&density)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sandpile_run_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let density = write_ball3(dir.path());
    let run = |tag: &str| {
        let cluster = dir.path().join(format!("c{tag}.csv"));
        let odometer = dir.path().join(format!("o{tag}.csv"));
        let report = dir.path().join(format!("r{tag}.json"));
        run_ok(
            gasket()
                .args(["sandpile", "--level", "2"])
                .arg("--density")
                .arg(&density)
                .arg("--out")
                .arg(&cluster)
                .arg("--odometer")
                .arg(&odometer)
                .arg("--report")
                .arg(&report),
        );
        (
            std::fs::read(cluster).unwrap(),
            std::fs::read(odometer).unwrap(),
            std::fs::read(report).unwrap(),
        )
    };
    let first = run("1");
    let second = run("2");
    assert_eq!(first, second);

    let report: serde_json::Value = serde_json::from_slice(&first.2).unwrap();
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config"]["level"], 2);
    assert!(report["cluster_size"].as_u64().unwrap() > 0);
    let cluster_text = String::from_utf8(first.0).unwrap();
    assert!(cluster_text.starts_with("# level=2 domain_L=2\n"));
}

#[test]
fn rotor_flux_stays_bounded_and_divergence_matches() {
    let dir = tempfile::tempdir().unwrap();
    let density = write_ball3(dir.path());
    let report = dir.path().join("rotor.json");
    run_ok(
        gasket()
            .args(["rotor", "--level", "2"])
            .arg("--density")
            .arg(&density)
            .arg("--report")
            .arg(&report),
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    assert!(report["max_abs_rho"].as_i64().unwrap() <= 6);
    assert_eq!(report["divergence_matches_load"], true);
    assert_eq!(report["particles"], report["cluster_size"]);
}

#[test]
fn idla_runs_are_deterministic_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let density = write_ball3(dir.path());
    let run = |tag: &str| {
        let out_dir = dir.path().join(format!("trials{tag}"));
        let report = dir.path().join(format!("idla{tag}.json"));
        run_ok(
            gasket()
                .args(["idla", "--level", "2", "--seed", "9", "--trials", "2"])
                .arg("--density")
                .arg(&density)
                .arg("--out-dir")
                .arg(&out_dir)
                .arg("--report")
                .arg(&report),
        );
        (
            std::fs::read(out_dir.join("trial_000.csv")).unwrap(),
            std::fs::read(out_dir.join("trial_001.csv")).unwrap(),
            std::fs::read(report).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn obstacle_reports_the_exact_family_when_it_applies() {
    let dir = tempfile::tempdir().unwrap();
    let density = write_ball3(dir.path());
    let report = dir.path().join("obstacle.json");
    let cluster = dir.path().join("obstacle.csv");
    run_ok(
        gasket()
            .args(["obstacle", "--level", "3"])
            .arg("--density")
            .arg(&density)
            .arg("--cluster")
            .arg(&cluster)
            .arg("--report")
            .arg(&report),
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    let oracle = &report["oracle"];
    assert_eq!(oracle["source_log2"], 0);
    assert_eq!(oracle["cluster_log2"], 1);
    assert!(oracle["max_rel_err"].as_f64().unwrap() < 0.02);
    assert!(std::fs::read_to_string(cluster).unwrap().lines().count() > 1);
}

#[test]
fn render_layers_share_one_context() {
    let dir = tempfile::tempdir().unwrap();
    let density = write_ball3(dir.path());
    let level2 = dir.path().join("level2.csv");
    let level3 = dir.path().join("level3.csv");
    for (level, path) in [("2", &level2), ("3", &level3)] {
        run_ok(
            gasket()
                .args(["sandpile", "--level", level])
                .arg("--density")
                .arg(&density)
                .arg("--out")
                .arg(path),
        );
    }

    let svg_path = dir.path().join("out.svg");
    run_ok(gasket().arg("render").arg(&level2).arg("-o").arg(&svg_path));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.contains("<circle"));
    assert!(svg.contains("level2"));

    let mixed = gasket()
        .arg("render")
        .arg(&level2)
        .arg(&level3)
        .arg("-o")
        .arg(dir.path().join("mixed.svg"))
        .output()
        .unwrap();
    assert_eq!(mixed.status.code(), Some(2));
}

#[test]
fn limit_harness_covers_models_and_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let density = write_ball3(dir.path());
    let report = dir.path().join("limit.json");
    run_ok(
        gasket()
            .args(["limit", "--levels", "2:3", "--models", "sandpile,rotor"])
            .arg("--density")
            .arg(&density)
            .arg("--report")
            .arg(&report),
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    let levels = report["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 2);
    for level in levels {
        let models = level["models"].as_array().unwrap();
        assert_eq!(models.len(), 2);
        assert_eq!(models[0]["model"], "sandpile");
        assert!(models[0]["mass"]["pass"].as_bool().unwrap());
    }
    let criteria = &report["criteria"];
    assert!(criteria["margins_decrease"].as_bool().unwrap());
    assert!(criteria["boundary_nonincreasing"].as_bool().unwrap());
    assert!(report["boundary"]["estimates"].as_array().unwrap().len() >= 2);
}
