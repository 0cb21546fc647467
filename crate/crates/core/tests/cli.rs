//! The command-line front end and the harness plumbing around it.

use std::path::PathBuf;
use std::process::Command;

use doublecoset::harness::{run_scenario, scenario, RunOptions, ScenarioConfig, Status};
use doublecoset::Error;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_doublecoset"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("doublecoset-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn scenario_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

#[test]
fn catalog_lists_groups_and_scenarios() {
    let out = bin().arg("catalog").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("groups\n"));
    for needle in ["  heisenberg:", "klein4:", "scenarios", "S3-KH12:", "se2-rotations (not in --all):"] {
        assert!(text.contains(needle), "{needle}");
    }
}

#[test]
fn bad_configurations_exit_with_code_two() {
    let cases = [
        ("unknown-group.conf", "name = x\ngroup = S5\nK = e\nH = e\nscheme = exact-sum\n"),
        ("unknown-key.conf", "name = x\ngroup = S3\nK = e\nH = e\nscheme = exact-sum\ncolour = blue\n"),
        ("missing-key.conf", "name = x\ngroup = S3\nK = e\nscheme = exact-sum\n"),
        ("bad-scheme.conf", "name = x\ngroup = S3\nK = e\nH = e\nscheme = tensor\n"),
        ("no-cover.conf", "name = x\ngroup = heisenberg\nK = center\nH = x-axis\nscheme = tensor\nresolution = 16\n"),
        ("odd-resolution.conf", "name = x\ngroup = axb\nK = e\nH = translations\nscheme = tensor\nresolution = 7\n"),
    ];
    for (file, text) in cases {
        let p = scratch(file);
        std::fs::write(&p, text).unwrap();
        let out = bin().arg("verify").arg(&p).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{file}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"), "{file}");
    }
    let out = bin().args(["verify", "/nonexistent/scenario.conf"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_writes_json_and_csv() {
    let (json, csv_path) = (scratch("report.json"), scratch("report.csv"));
    let out = bin()
        .arg("verify")
        .arg(scenario_file("s3-kh12.conf"))
        .arg("--report")
        .arg(&json)
        .arg("--csv")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS weil"));
    assert!(stdout.trim_end().ends_with("overall 1 scenarios, 0 failed"));

    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["report"]["scenario"], "S3-KH12");
    assert_eq!(reports[0]["summary"]["fail"], 0);

    let mut rd = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), ["scenario", "check", "residual", "error", "tolerance", "status"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert!(rows.iter().any(|r| &r[1] == "weil" && &r[5] == "PASS"));
    assert!(rows.iter().all(|r| &r[5] != "FAIL"));
}

#[test]
fn seed_override_changes_only_the_seed() {
    let base = scenario("axb-translations").unwrap();
    let a = run_scenario(&base.clone().with_seed(5), &RunOptions::default()).unwrap();
    let b = run_scenario(&base.with_seed(5), &RunOptions::default()).unwrap();
    assert_eq!(a.body(), b.body());
    assert!(a.body().contains("seed = 5"));
}

#[test]
fn finite_reports_are_byte_identical_across_runs() {
    let cfg = scenario("S4-klein").unwrap();
    let a = run_scenario(&cfg, &RunOptions::default()).unwrap();
    let b = run_scenario(&cfg, &RunOptions { parallel: true }).unwrap();
    assert_eq!(a.body(), b.body());
    assert!(a.passed());
}

#[test]
fn config_parsing() {
    let cfg = ScenarioConfig::parse(
        "# comment\nname = t\ngroup = axb\nK = e\nH = dilations # trailing\nscheme = tensor\nresolution = 32\n\
         tol.slack = 3\nsamples = 4\ncover_region = 0.5,2;-1,1\n",
    )
    .unwrap();
    assert_eq!(cfg.h, "dilations");
    assert_eq!(cfg.tol.slack, 3.0);
    assert_eq!(cfg.samples, 4);
    assert_eq!(cfg.cover_region.unwrap().dim, 2);
    assert!(matches!(cfg.with_resolution(5), Err(Error::Config(_))));
    for bad in ["name = t\nname = u\n", "just words\n", "name = t\ngroup = S3\nK = e\nH = e\nscheme = exact-sum\nsamples = 0\n"] {
        assert!(matches!(ScenarioConfig::parse(bad), Err(Error::Config(_))), "{bad:?}");
    }
}

#[test]
fn zeroed_rho_is_reported_by_the_support_counterexample() {
    let r = run_scenario(&scenario("D4-reflections").unwrap(), &RunOptions::default()).unwrap();
    let rec = r.record("support-counterexample").unwrap();
    assert_eq!(rec.status, Status::Pass);
    assert!(rec.detail.contains("pairings not positive") && !rec.detail.starts_with("0 "), "{}", rec.detail);
}
