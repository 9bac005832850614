use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hermitizer::toymodel::ToyParams;
use hermitizer::Tolerance;
use hermitizer_cli::commands::toy_model_file;
use hermitizer_cli::model::ModelFile;
use hermitizer_cli::report::{representation_report, RepresentationReport, VerifyReport};

fn hermitizer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermitizer"))
        .args(args)
        .env_remove("HERMITIZER_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_toy(dir: &Path) -> String {
    let path = dir.join("toy.json");
    let out = hermitizer(&[
        "toy",
        "--r",
        "0.3",
        "--s",
        "-0.2",
        "--t",
        "0.15",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path.to_str().unwrap().to_string()
}

#[test]
fn toy_score_counts_zeros_per_depth() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_toy(dir.path());
    let out = hermitizer(&["score", &model, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut rows: Vec<(usize, usize, usize)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect();
    rows.sort();
    assert_eq!(rows, vec![(0, 6, 0), (1, 4, 1), (2, 2, 2), (3, 0, 3)]);
}

#[test]
fn paths_summary_for_three_factors() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_toy(dir.path());
    let out = hermitizer(&["paths", &model]);
    assert_eq!(stdout(&out).trim(), "10 nodes, 8 paths, terminals: 1/3/3/1");
    let listed = stdout(&hermitizer(&["paths", &model, "--list", "--format", "csv"]));
    assert_eq!(listed.lines().count(), 9);
}

#[test]
fn verify_passes_on_toy_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_toy(dir.path());
    let out = hermitizer(&["verify", &model]);
    assert_eq!(out.status.code(), Some(0));
    let report: VerifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.passed);
    assert_eq!(report.pairings.len(), 4);
}

#[test]
fn verify_rejects_indefinite_metric_factors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"dimension":2,"hamiltonian":[[[1,0],[0,0]],[[0,0],[2,0]]],
            "metric_factors":[[[[1,0],[0,0]],[[0,0],[-1,0]]],[[[2,0],[0,0]],[[0,0],[1,0]]]]}"#,
    )
    .unwrap();
    let out = hermitizer(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: VerifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!report.chain.passed);
    assert!(report.chain.levels.iter().any(|l| !l.passed));
    let out = hermitizer(&["score", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn schema_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(&path, r#"{"dimension":2,"surprise":true}"#).unwrap();
    assert_eq!(
        hermitizer(&["score", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        hermitizer(&["score", "/nonexistent/model.json"])
            .status
            .code(),
        Some(2)
    );
    let model = write_toy(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_hermitizer"))
        .args(["score", &model])
        .env("HERMITIZER_TOL", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_toy(dir.path());
    let text = stdout(&hermitizer(&["transform", &model]));
    let parsed: RepresentationReport = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(again, text);

    let tol = Tolerance::default();
    let direct = representation_report(
        &ModelFile::load(Path::new(&model))
            .unwrap()
            .decode(&tol)
            .unwrap(),
        &tol,
    )
    .unwrap();
    assert_eq!(parsed, direct);
}

#[test]
fn toy_model_file_round_trips() {
    let file = toy_model_file(&ToyParams::new(0.1 + 0.2, -1.0 / 3.0, 0.7).unwrap());
    assert_eq!(
        ModelFile::from_json(&file.to_json().unwrap()).unwrap(),
        file
    );
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_toy(dir.path());
    for args in [
        vec!["transform", model.as_str(), "--k", "1"],
        vec![
            "evolve",
            model.as_str(),
            "--k",
            "2",
            "--t-final",
            "2",
            "--state",
            "1,0.5,0",
            "--samples",
            "8",
        ],
        vec!["toy", "--sweep", "20", "--seed", "11"],
    ] {
        assert_eq!(stdout(&hermitizer(&args)), stdout(&hermitizer(&args)));
    }
}

#[test]
fn evolution_conserves_physical_norm_in_every_depth() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_toy(dir.path());
    let mut finals = Vec::new();
    for k in ["0", "1", "2", "3"] {
        let out = hermitizer(&[
            "evolve",
            &model,
            "--k",
            k,
            "--t-final",
            "3",
            "--state",
            "[[1,0],[0,1],0.5]",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        let norms: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(norms.len(), 101);
        assert!(norms
            .iter()
            .all(|n| (n - norms[0]).abs() < 1e-10 * norms[0]));
        let last: Vec<f64> = text
            .lines()
            .last()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        finals.push((last[1], last[2]));
    }
    for w in finals.windows(2) {
        assert!((w[0].0 - w[1].0).abs() < 1e-9 && (w[0].1 - w[1].1).abs() < 1e-9);
    }
}

#[test]
fn oversized_rk4_step_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_toy(dir.path());
    let out = hermitizer(&[
        "evolve",
        &model,
        "--k",
        "3",
        "--t-final",
        "1",
        "--state",
        "1,0,0",
        "--method",
        "rk4",
        "--step",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bg_reports_matching_levels() {
    let out = hermitizer(&[
        "bg", "--grid-n", "800", "--grid-l", "10", "--levels", "3", "--format", "csv",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(f[4] < 1e-6 && f[5] < 1e-3, "{line}");
    }
}
