//! End-to-end runs of the `cstlab` binary.

use cstlab::cli::{RunConfig, Suite};
use cstlab::cst::{PeterWeylDocument, PeterWeylVector};
use cstlab::group_model::GroupSpec;
use num_complex::Complex64;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cstlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cstlab"))
        .args(args)
        .env("CSTLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn torus_config(dir: &Path, out: &str, suites: Vec<Suite>) -> RunConfig {
    let mut cfg = RunConfig::for_group(&GroupSpec::torus(1).unwrap());
    cfg.output_dir = dir.join(out);
    cfg.suites = suites;
    cfg.table_levels = 3;
    cfg
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn empty_suite_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = torus_config(dir.path(), "out", Vec::new());
    let path = write_config(dir.path(), &cfg);
    let out = cstlab(&["verify", "-c", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", text(&out.stderr));
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"group": {"family": "torus", "n": 1}, "hbar_0": 1.0}"#).unwrap();
    let out = cstlab(&["verify", "-c", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("hbar_0"), "stderr: {}", text(&out.stderr));
}

#[test]
fn torus_golden_verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = torus_config(dir.path(), "out", vec![Suite::TorusGolden]);
    let path = write_config(dir.path(), &cfg);
    let out = cstlab(&["verify", "-c", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        text(&out.stdout),
        text(&out.stderr)
    );
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["suites"][0]["suite"], Value::String("torus-golden".into()));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = torus_config(dir.path(), "out", vec![Suite::Cst]);
    cfg.tolerances.unitarity = 1e-300;
    let path = write_config(dir.path(), &cfg);
    let out = cstlab(&["verify", "-c", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", text(&out.stderr));
    assert!(dir.path().join("out/report.json").exists());
}

fn strip_runtime(csv_text: &str) -> Vec<String> {
    csv_text
        .lines()
        .map(|l| {
            let mut fields: Vec<&str> = l.split(',').collect();
            fields.pop();
            fields.join(",")
        })
        .collect()
}

#[test]
fn outputs_are_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let suites = vec![Suite::Certify, Suite::Cst, Suite::Connection];
    let mut reports = Vec::new();
    let mut tables = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "4")] {
        let cfg = torus_config(dir.path(), run, suites.clone());
        let path = dir.path().join(format!("config_{run}.json"));
        std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
        for cmd in ["verify", "table"] {
            let out = Command::new(env!("CARGO_BIN_EXE_cstlab"))
                .args([cmd, "-c", path.to_str().unwrap()])
                .env("CSTLAB_THREADS", threads)
                .output()
                .unwrap();
            assert_eq!(out.status.code(), Some(0), "{cmd}: {}", text(&out.stderr));
        }
        reports.push(std::fs::read(cfg.output_dir.join("report.json")).unwrap());
        tables.push(strip_runtime(
            &std::fs::read_to_string(cfg.output_dir.join("table_cst.csv")).unwrap(),
        ));
    }
    assert!(reports[0] == reports[1], "report.json differs between runs");
    assert_eq!(tables[0], tables[1]);
    assert_eq!(tables[0][0], "level,nodes_total,max_rel_err");
    assert_eq!(tables[0].len(), 4);
}

#[test]
fn transform_of_a_constant_is_the_constant() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GroupSpec::su2();
    let cfg = RunConfig::for_group(&spec);
    let path = write_config(dir.path(), &cfg);
    let input = dir.path().join("f.json");
    let f = PeterWeylVector::constant(&spec, Complex64::new(0.75, -0.5));
    std::fs::write(&input, serde_json::to_string(&f).unwrap()).unwrap();
    let output = dir.path().join("g.json");
    let out = cstlab(&[
        "transform",
        "-c",
        path.to_str().unwrap(),
        "-i",
        input.to_str().unwrap(),
        "--hbar",
        "0.5",
        "-o",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", text(&out.stderr));
    let result: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    let doc: PeterWeylDocument = serde_json::from_value(result["transformed"].clone()).unwrap();
    assert_eq!(PeterWeylVector::from_document(doc).unwrap(), f);
    let samples = result["samples"].as_array().unwrap();
    assert_eq!(samples.len(), cfg.sample_points);
    for s in samples {
        assert_eq!((s["re"].as_f64(), s["im"].as_f64()), (Some(0.75), Some(-0.5)));
    }
}

#[test]
fn transform_rejects_mismatched_group() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::for_group(&GroupSpec::torus(2).unwrap());
    let path = write_config(dir.path(), &cfg);
    let input = dir.path().join("f.json");
    let f = PeterWeylVector::constant(&GroupSpec::su2(), Complex64::new(1.0, 0.0));
    std::fs::write(&input, serde_json::to_string(&f).unwrap()).unwrap();
    let output = dir.path().join("g.json");
    let args = [
        "transform",
        "-c",
        path.to_str().unwrap(),
        "-i",
        input.to_str().unwrap(),
        "--hbar",
        "1",
        "-o",
    ];
    let out = cstlab(&[&args[..], &[output.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert!(!output.exists());
}

#[test]
fn kernel_tables_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::for_group(&GroupSpec::su2());
    cfg.kernel_points = 16;
    let path = write_config(dir.path(), &cfg);
    let output = dir.path().join("kernel.csv");
    let out = cstlab(&[
        "kernel",
        "-c",
        path.to_str().unwrap(),
        "--hbar",
        "0.5",
        "-o",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", text(&out.stderr));
    let kernel = std::fs::read_to_string(&output).unwrap();
    assert_eq!(kernel.lines().next(), Some("t,value"));
    assert_eq!(kernel.lines().count(), 17);
    let nu = std::fs::read_to_string(dir.path().join("kernel_nu.csv")).unwrap();
    assert_eq!(nu.lines().next(), Some("axis,r,value"));
    assert_eq!(nu.lines().count(), 1 + 3 * 17);
    for line in kernel.lines().skip(1) {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(value.is_finite());
    }
}

#[test]
fn nonpositive_hbar_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::for_group(&GroupSpec::torus(1).unwrap());
    let path = write_config(dir.path(), &cfg);
    let output = dir.path().join("kernel.csv");
    let out = cstlab(&[
        "kernel",
        "-c",
        path.to_str().unwrap(),
        "--hbar",
        "-1",
        "-o",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
