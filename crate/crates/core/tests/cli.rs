use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use thz_irs::cli::RunReport;

fn plan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plan")).args(args).output().expect("run plan")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

const SMALL: &str = r#"{"element_count": 2, "grid": {"dx_m": 1.0, "dy_m": 1.0}, "ue_counts": [1, 2]}"#;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(plan(&["--help"]).status.code(), Some(0));
    assert_eq!(plan(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(plan(&["band-plan"]).status.code(), Some(1));
    assert_eq!(plan(&["band-plan", "--config", "/nonexistent/plan.json"]).status.code(), Some(1));
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "a.json", r#"{"element_cuont": 4}"#);
    let out = plan(&["band-plan", "--config", s(&unknown)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("element_cuont"));
    let negative = write_config(dir.path(), "b.json", r#"{"p_max_w": -1}"#);
    assert_eq!(plan(&["band-plan", "--config", s(&negative)]).status.code(), Some(1));
    let algo = write_config(dir.path(), "c.json", SMALL);
    assert_eq!(
        plan(&["optimize", "--config", s(&algo), "--algo", "magic"]).status.code(),
        Some(1)
    );
}

#[test]
fn empty_config_gives_default_band_plan() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "empty.json", "");
    let out = plan(&["band-plan", "--config", s(&empty)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let centers: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(centers, vec![200e9, 250e9, 300e9, 350e9]);
}

#[test]
fn absorption_sweep_is_deterministic_and_dips_at_the_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", "{}");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(plan(&["absorption-sweep", "--config", s(&cfg), "--out", s(&a)]).status.success());
    assert!(plan(&["absorption-sweep", "--config", s(&cfg), "--out", s(&b)]).status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "f_hz,K_per_m,gain_db_d1,gain_db_d2,gain_db_d3");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 401);
    let at = |f: f64| rows.iter().find(|r| (r[0] - f).abs() < 1.0).unwrap();
    assert!(at(325e9)[1] > 10.0 * at(300e9)[1]);
    assert!(at(380e9)[1] > 10.0 * at(350e9)[1]);
    // With the 1/f² spreading loss removed, the gain dips at both lines.
    let flat = |f: f64| at(f)[4] + 20.0 * f.log10();
    assert!(flat(325e9) < flat(300e9) && flat(325e9) < flat(350e9));
    assert!(flat(380e9) < flat(360e9) && flat(380e9) < flat(400e9));
    assert!(rows.iter().all(|r| r[2] > r[3] && r[3] > r[4]));
}

#[test]
fn optimize_prints_a_checked_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL);
    let out = plan(&["optimize", "--config", s(&cfg), "--algo", "bcs", "--seed", "3", "--ues", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["feasible"], true);
    assert_eq!(v["ue_rates"].as_array().unwrap().len(), 2);
    assert!(v["sum_rate"].as_f64().unwrap() > 2e9);
}

#[test]
fn optimize_exits_two_when_requirements_cannot_be_met() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"element_count": 2, "grid": {"dx_m": 2.0, "dy_m": 2.0}, "rate_requirement_bps": 1e13}"#,
    );
    let out = plan(&["optimize", "--config", s(&cfg), "--algo", "minidis", "--ues", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["feasible"], false);
    assert_eq!(v["sum_rate"], 0.0);
}

#[test]
fn monte_carlo_writes_loadable_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let r = plan(&["monte-carlo", "--config", s(&cfg), "--seeds", "1..2", "--out", s(out)]);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let summary = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary, std::fs::read_to_string(b.join("summary.csv")).unwrap());
    let mut lines = summary.lines();
    assert_eq!(lines.next().unwrap(), "seed,algo,U,sum_rate_bps,feasible,wallclock_s");
    assert_eq!(lines.count(), 2 * 2 * 4);
    let aggregate = std::fs::read_to_string(a.join("aggregate.csv")).unwrap();
    assert_eq!(aggregate.lines().count(), 1 + 2 * 4);

    let report = RunReport::load(&a.join("report.json")).unwrap();
    assert_eq!(report.records.len(), 16);
    assert_eq!(report.bands.len(), 4);
}

#[test]
fn report_load_rejects_tampered_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL);
    let out = dir.path().join("run");
    let r = plan(&["monte-carlo", "--config", s(&cfg), "--seeds", "1..1", "--out", s(&out)]);
    assert!(r.status.success());
    let path = out.join("report.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rate = v["records"][0]["solution"]["sum_rate"].as_f64().unwrap();
    v["records"][0]["solution"]["sum_rate"] = serde_json::json!(rate * 2.0);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    assert!(RunReport::load(&bad).is_err());
    std::fs::write(&bad, "{not json").unwrap();
    assert!(RunReport::load(&bad).is_err());
}

#[test]
fn wallclock_column_is_filled_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"element_count": 2, "grid": {"dx_m": 2.0, "dy_m": 2.0}, "ue_counts": [1], "algorithms": ["ranloc"]}"#,
    );
    let out = dir.path().join("run");
    let r = plan(&["monte-carlo", "--config", s(&cfg), "--seeds", "1..1", "--out", s(&out), "--wallclock"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let row = summary.lines().nth(1).unwrap();
    let t: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!(t >= 0.0);
}
