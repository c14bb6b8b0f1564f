use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn epichart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epichart"))
        .args(args)
        .env_remove("ABM_THREADS")
        .output()
        .unwrap()
}

fn scenarios() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn shipped_scenarios_validate() {
    let all = scenarios();
    assert!(all.len() >= 4);
    for s in all {
        let out = epichart(&["validate", "--scenario", s.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}: {}",
            s.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (
            "unknown_field.json",
            r#"{"model_pack": "varicella", "population": 100, "colour": 1}"#,
        ),
        (
            "bad_pack.json",
            r#"{"model_pack": "measles", "population": 100}"#,
        ),
        (
            "bad_horizon.json",
            r#"{"model_pack": "pertussis", "population": 100, "horizon": 5, "burn_in": 10}"#,
        ),
        ("broken.json", "{"),
    ];
    for (name, body) in cases {
        let path = write(tmp.path(), name, body);
        let out = epichart(&["validate", "--scenario", &path]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    let missing = tmp.path().join("absent.json");
    assert_eq!(
        epichart(&["validate", "--scenario", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(epichart(&["frobnicate"]).status.code(), Some(2));

    let ok = write(
        tmp.path(),
        "ok.json",
        r#"{"model_pack": "varicella", "population": 100}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = epichart(&[
        "run",
        "--scenario",
        &ok,
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = epichart(&[
        "run",
        "--scenario",
        &ok,
        "--out",
        out_dir.to_str().unwrap(),
        "--realizations",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_records_seed_and_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(
        tmp.path(),
        "s.json",
        r#"{"model_pack": "pertussis", "population": 800, "horizon": 12, "burn_in": 6, "realizations": 2}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = epichart(&[
        "run",
        "--quiet",
        "--scenario",
        &scenario,
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "4242",
        "--realizations",
        "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["master_seed"], 4242);
    assert_eq!(manifest["config"]["realizations"], 3);
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["success"], true);
    for file in [
        "incidence.csv",
        "summary.csv",
        "coverage.csv",
        "contact_matrix.csv",
        "fan_chart.svg",
    ] {
        assert!(out_dir.join(file).is_file(), "{file} missing");
    }
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.lines().count() > 3);
}

#[test]
fn sweeps_write_one_directory_per_duration() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(
        tmp.path(),
        "s.json",
        r#"{"model_pack": "varicella", "population": 600, "horizon": 10, "burn_in": 5, "realizations": 1, "intervention": {"boosting_durations": [2, 3]}}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = Command::new(env!("CARGO_BIN_EXE_epichart"))
        .args([
            "run",
            "--quiet",
            "--scenario",
            &scenario,
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .env("ABM_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for d in ["boost_2y", "boost_3y"] {
        assert!(out_dir.join(d).join("incidence.csv").is_file(), "{d}");
    }
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"jobs\": 2"));
}

#[test]
fn export_charts_writes_dot_files() {
    let tmp = tempfile::tempdir().unwrap();
    for pack in ["varicella", "pertussis"] {
        let dir = tmp.path().join(pack);
        let out = epichart(&[
            "export-charts",
            "--pack",
            pack,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let dots: Vec<PathBuf> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        assert!(dots.len() >= 3, "{pack}: {dots:?}");
        for d in dots {
            let text = std::fs::read_to_string(&d).unwrap();
            assert!(text.starts_with("digraph"), "{}", d.display());
            assert!(text.contains("->"));
        }
    }
    assert_eq!(
        epichart(&["export-charts", "--pack", "measles", "--out", "x"])
            .status
            .code(),
        Some(2)
    );
}
