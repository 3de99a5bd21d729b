use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use spectrum_core::NashOptions;
use spectrum_eq::scenario::ScenarioSpec;
use spectrum_eq::sweep::{columns, run_sweep};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectrum-eq"))
}

fn scenarios() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    out
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

#[test]
fn every_scenario_runs_within_budget() {
    let paths = scenarios();
    assert!(paths.len() >= 12);
    for path in paths {
        let spec = ScenarioSpec::load(&path).unwrap();
        let start = Instant::now();
        let data = run_sweep(&spec, &NashOptions::default());
        let secs = start.elapsed().as_secs_f64();
        let status = data.column("status").unwrap();
        let bad: Vec<_> = data.rows.iter().filter(|r| r[status] != "ok").collect();
        assert!(bad.is_empty(), "{}: {} rows not ok, first {:?}", spec.name, bad.len(), bad.first());
        assert!(secs < 60.0, "{} took {secs:.1}s", spec.name);
        assert_eq!(data.header, columns(&spec));
    }
}

#[test]
fn sweep_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.csv"));
        let status = bin().arg("sweep").arg(scenario("entrant_b1_w1")).arg("-o").arg(&out).status().unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(text.starts_with("alpha,p_0,x_0,profit_0,p_e0,"));
}

#[test]
fn sweep_writes_stdout_without_output() {
    let out = bin().arg("sweep").arg(scenario("monopoly_b1_w1")).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.lines().nth(1).unwrap();
    // alpha = 0 leaves the incumbent alone on its licensed band, where
    // p + x = 1 - x and the profit-maximising price is 1/2.
    assert!(first.starts_with("0,0.5,0.25,0.125,"), "{first}");
}

#[test]
fn columns_depend_only_on_the_layout() {
    let base = ScenarioSpec::load(&scenario("entrant_b1_w1")).unwrap();
    let mut other = base.clone();
    other.b = Some(vec![3.0]);
    other.w = spectrum_eq::scenario::Extent::Infinite;
    other.alpha = 0.4;
    assert_eq!(columns(&base), columns(&other));
    other.compare.pop();
    assert_ne!(columns(&base), columns(&other));
}

#[test]
fn filter_runs_only_matching_criteria() {
    let out = bin().args(["verify", "--filter", "c04"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 1, "{text}");
    assert!(lines[0].starts_with("PASS c04 unbundled-crossing"));
}

#[test]
fn unknown_filter_is_an_error() {
    let out = bin().args(["verify", "--filter", "no-such-check"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn mutation_makes_the_criterion_fail() {
    for id in ["c01", "c07", "c09"] {
        let out = bin().args(["verify", "--filter", id, "--mutate", id]).output().unwrap();
        assert!(!out.status.success(), "{id} survived its mutation");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with(&format!("FAIL {id}")), "{text}");
    }
}

#[test]
fn json_report_lists_measurements() {
    let out = bin().args(["verify", "--filter", "band-expansion", "--json"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &v.as_array().unwrap()[0];
    assert_eq!(report["id"], "c08");
    assert_eq!(report["passed"], true);
    for check in report["checks"].as_array().unwrap() {
        assert!(check["measured"].as_f64().unwrap() <= check["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn eq_prints_one_equilibrium() {
    let out = bin().args(["eq", "--mode", "exclusive", "--B", "1", "--W", "1", "--N", "1"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["converged"], true);
    for t in v["prices"]["tariffs"].as_array().unwrap() {
        assert!((t["Single"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }
    let profit = v["welfare"]["profits"][0].as_f64().unwrap();
    assert!((profit - 2.0 / 27.0).abs() < 1e-6);
}

#[test]
fn eq_accepts_an_unbounded_band() {
    let out = bin().args(["eq", "--mode", "bundled", "--B", "1,2", "--W", "inf", "--alpha", "0.5"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["prices"]["tariffs"].as_array().unwrap().len(), 2);
}

#[test]
fn iteration_cap_comes_from_the_environment() {
    let out = bin()
        .args(["eq", "--mode", "bundled", "--B", "1", "--M", "3", "--W", "1", "--alpha", "0.3"])
        .env("SPECTRUM_EQ_MAXITER", "1")
        .output()
        .unwrap();
    // One round cannot settle three coupled prices.
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["converged"], false);
    assert_eq!(v["rounds"], 1);
}

#[test]
fn bad_scenarios_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"name":"x","mode":"bundled","B":[1],"W":1,"sweep":{"variable":"alpha","start":0,"stop":1,"step":0.1},"extra":1}"#)
        .unwrap();
    let out = bin().arg("sweep").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extra"));
}
