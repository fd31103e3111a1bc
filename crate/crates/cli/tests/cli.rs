use std::process::{Command, Output};

use serde_json::Value;

fn betaflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betaflow"))
        .args(args)
        .env_remove("BETAFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sample_is_deterministic_and_in_h() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let out = betaflow(&[
            "sample", "--dist", "trivariate-h", "--p", "2", "--q", "1.5", "--r", "1", "--n", "1000", "--seed", "7",
            "--out", p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("x1,x2,x3\n"));
    assert!(!text.contains('\r'));
    let rows = rows(&text);
    assert_eq!(rows.len(), 1000);
    for r in rows {
        let (x1, x2, x3) = (r[0], r[1], r[2]);
        assert!(x3 > 0.0 && x3 < (x1 * x2).min((1.0 - x1) * (1.0 - x2)), "{r:?}");
    }
}

#[test]
fn different_seeds_differ() {
    let a = betaflow(&["sample", "--dist", "beta", "--p", "2", "--q", "3", "--n", "5", "--seed", "1"]);
    let b = betaflow(&["sample", "--dist", "beta", "--p", "2", "--q", "3", "--n", "5", "--seed", "2"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn matrix_beta_rejects_small_p() {
    let out = betaflow(&["sample", "--dist", "matrix-beta2", "--p", "0.4", "--q", "1", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "parameter");
}

#[test]
fn unknown_dist_is_a_usage_error() {
    let out = betaflow(&["sample", "--dist", "cauchy", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn density_constants() {
    let out = betaflow(&["density", "--dist", "trivariate-h", "--p", "2", "--q", "1", "--r", "1", "--at", "0.5,0.5,0.1"]);
    assert!(out.status.success());
    let v = json(&out)["logpdf"].as_f64().unwrap();
    assert!((v - 10.8f64.ln()).abs() < 1e-12, "{v}");

    let out = betaflow(&["density", "--dist", "matrix-beta2", "--p", "1.5", "--q", "1.5", "--at", "0.5,0,0.5"]);
    let v = json(&out)["logpdf"].as_f64().unwrap();
    assert!((v - (6.0 / std::f64::consts::PI).ln()).abs() < 1e-12, "{v}");
}

#[test]
fn density_outside_domain_fails() {
    let out = betaflow(&["density", "--dist", "trivariate-h", "--p", "2", "--q", "1", "--r", "1", "--at", "0.5,0.5,0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["error"]["kind"], "domain");
}

#[test]
fn transform_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    std::fs::write(&input, "x1,x2,x3\n0.5,0.5,0.1\n0.2,0.7,0.05\n").unwrap();
    let mid = dir.path().join("y.csv");
    let out = betaflow(&["transform", "--map", "psi2", "--in", input.to_str().unwrap(), "--out", mid.to_str().unwrap()]);
    assert!(out.status.success());
    let back = betaflow(&["transform", "--map", "psi2-inv", "--in", mid.to_str().unwrap()]);
    assert!(back.status.success());
    let text = String::from_utf8(back.stdout).unwrap();
    assert!(text.starts_with("x1,x2,x3\n"));
    let expected = [[0.5, 0.5, 0.1], [0.2, 0.7, 0.05]];
    for (r, e) in rows(&text).iter().zip(expected) {
        for k in 0..3 {
            assert!((r[k] - e[k]).abs() < 1e-14);
        }
    }

    std::fs::write(&input, "0.5,0.5,0.3\n").unwrap();
    let out = betaflow(&["transform", "--map", "psi1", "--in", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn funceq_reports_residual() {
    let out = betaflow(&["funceq", "--from-shapes", "1,1,1", "--grid", "10"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["grid"], 10);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["params"]["gamma"], 1.0);

    let out = betaflow(&["funceq", "--alpha", "0.5", "--A1", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!((json(&out)["max_residual"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn perpetuity_runs_and_validates_init() {
    let out = betaflow(&["perpetuity", "--eq", "s", "--init", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let out = betaflow(&["perpetuity", "--eq", "r", "--seed", "3", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["ks_vs_target"].as_f64().unwrap() <= 0.02);
    assert_eq!(rows(&std::fs::read_to_string(&csv).unwrap()).len(), 100_000);

    let out = betaflow(&["perpetuity", "--eq", "t", "--keep", "5000"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["ks_vs_target"].is_number());
    assert!(v["two_start"]["ks"].is_number());
}

#[test]
fn verify_small_run_and_bad_scenario() {
    let out = betaflow(&["verify", "funceq-family", "--from-shapes", "1,1,1", "--grid", "10"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], true);
    assert!(v["reports"].as_array().unwrap().iter().all(|r| r["pass"] == true));

    let out = betaflow(&["verify", "neutrality", "--n", "2000", "--seeds", "5", "--seed", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));

    let out = betaflow(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_flags_a_failure() {
    // a 2-of-2 rule at alpha close to one rejects almost surely
    let out = betaflow(&["verify", "theorem1", "--n", "500", "--seeds", "2", "--alpha", "0.999"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert!(!v["failed"].as_array().unwrap().is_empty());
}
