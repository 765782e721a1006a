use std::process::Command;

use ewtoda_cli::{export_levelset, run_suite, show_conventions, Bound, CliError, SuiteSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ewtoda"))
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let err = run_suite(&SuiteSpec::new("no-such-suite")).unwrap_err();
    assert!(matches!(err, CliError::UnknownSuite(_)));
    assert!(err.to_string().contains("unknown suite"));
    assert_eq!(err.exit_code(), 2);
    let out = bin().args(["run", "--suite", "no-such-suite"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn zero_samples_is_a_config_error() {
    let err = run_suite(&SuiteSpec::new("quadric").with_samples(0)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn reports_are_deterministic() {
    let spec = SuiteSpec::new("toda-catalog").with_seed(11).with_samples(8);
    let a = run_suite(&spec).unwrap().to_json().unwrap();
    let b = run_suite(&spec).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let c = run_suite(&spec.clone().with_seed(12)).unwrap().to_json().unwrap();
    assert_ne!(a, c);
}

#[test]
fn report_fields() {
    let r = run_suite(&SuiteSpec::new("quadric").with_samples(6)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    for k in ["suite", "seed", "jet_order", "checks", "summary", "engine"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    let c = &v["checks"][0];
    for k in ["id", "point", "residuals", "pass", "resamples"] {
        assert!(c.get(k).is_some(), "missing {k}");
    }
    assert_eq!(v["engine"]["orientations"]["cotangent_einstein"], -1.0);
    assert_eq!(r.summary.checks, r.checks.len());
    assert!(r.passed());
}

#[test]
fn unattainable_tolerance_fails_with_small_residuals() {
    let r = run_suite(&SuiteSpec::new("kk-lift").with_samples(6).with_tol(1e-20)).unwrap();
    assert!(!r.passed());
    assert!(r.summary.max_residual > 0.0 && r.summary.max_residual < 1e-10);
    for c in &r.checks {
        assert!(c.bounds.values().all(|b| *b == Bound::Max(1e-20)));
    }
    let out = bin()
        .args(["run", "--suite", "kk-lift", "--samples", "3", "--tol", "1e-20", "--format", "text"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn per_residual_override_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "suite = quadric\nsamples = 4\nseed = 3\ntol.quadric = 1e-30\n").unwrap();
    let out_path = dir.path().join("report.json");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--samples", "5", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["samples"], 5);
    let q = v["checks"][0]["bounds"]["quadric"]["max"].as_f64().unwrap();
    assert!((q / 1e-30 - 1.0).abs() < 1e-12);
    let p = v["checks"][0]["bounds"]["pullback"]["max"].as_f64().unwrap();
    assert!((p / 1e-10 - 1.0).abs() < 1e-12);
}

#[test]
fn passing_run_exits_zero() {
    let out = bin().args(["run", "--suite", "incidence", "--samples", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["failed"], 0);
}

#[test]
fn box_override_moves_samples() {
    let mut spec = SuiteSpec::new("quadric").with_samples(6);
    spec.domain_box = Some(vec![(0.1, 0.2); 5]);
    let r = run_suite(&spec).unwrap();
    let five: Vec<_> = r.checks.iter().filter(|c| c.point.len() == 5).collect();
    assert!(!five.is_empty());
    assert!(five.iter().all(|c| c.point.iter().all(|v| (0.1..0.2).contains(v))));
}

#[test]
fn level_set_export() {
    let ls = export_levelset("example-1", 0.0, 10).unwrap();
    assert!(!ls.is_empty());
    let e = ewtoda::toda::catalog::entry("example-1").unwrap();
    let rel = e.relation.unwrap();
    for p in &ls.points {
        let at = [1.0, p[0], p[1], p[2]];
        let scale = ewtoda::toda::implicit::poly_scale(&rel, &at);
        assert!(rel.eval_f64(&at).abs() <= 1e-8 * scale);
    }
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("example1");
    ls.write(&stem).unwrap();
    let csv = std::fs::read_to_string(stem.with_extension("csv")).unwrap();
    assert!(csv.starts_with("X,Y,Z,U\n"));
    assert_eq!(csv.lines().count(), ls.points.len() + 1);
    let obj = std::fs::read_to_string(stem.with_extension("obj")).unwrap();
    assert_eq!(obj.lines().count(), ls.points.len());
}

#[test]
fn empty_level_set_is_reported() {
    let ls = export_levelset("appendix-b", 40.0, 6).unwrap();
    assert!(ls.is_empty());
    assert!(ls.summary().contains("empty"));
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["levelset", "--entry", "appendix-b", "--u0", "40", "--grid", "6", "--out"])
        .arg(dir.path().join("none"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("empty"));
}

#[test]
fn unknown_catalog_entry() {
    assert!(export_levelset("nope", 0.0, 4).is_err());
}

#[test]
fn conventions_text() {
    let s = show_conventions();
    assert!(s.contains("R = 4n(n+1)Λ"));
    assert!(s.contains("classical") && s.contains("antisymmetrized"));
    assert!(s.contains("ε = −1"));
    let out = bin().arg("conventions").output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), s);
}
