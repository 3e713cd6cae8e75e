//! End-to-end checks of the command-line tool and its exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neighborly"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn gen_rip_and_budget_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = run(&["gen", "--ensemble", "rademacher", "--n", "6", "--N", "9", "--seed", "4", "--out", "a.csv"], d);
    assert_eq!(g.status.code(), Some(0));
    let r = run(&["rip", "--matrix", "a.csv", "--m", "1,2"], d);
    assert_eq!(r.status.code(), Some(0));
    let v = json(&r);
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);
    // Rademacher columns have exact norm sqrt(n)
    assert!(v["entries"][0]["delta"].as_f64().unwrap().abs() < 1e-12);
    let refused = run(&["rip", "--matrix", "a.csv", "--m", "3", "--budget", "10"], d);
    assert_eq!(refused.status.code(), Some(3));
    let sampled = run(&["rip", "--matrix", "a.csv", "--m", "3", "--budget", "10", "--sampled", "5"], d);
    assert_eq!(sampled.status.code(), Some(0));
    assert_eq!(json(&sampled)["entries"][0]["method"], "sampled");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["rip"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["rip", "--matrix", "missing.csv", "--m", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--formula", "nope"], dir.path()).status.code(), Some(2));
}

#[test]
fn hand_instance_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let text = "n,N,spec,seed,algorithm_id\n2,3,custom(hand),0,none\n1,0,1\n0,1,1\n";
    std::fs::write(d.join("hand.csv"), text).unwrap();
    let ok = run(&["recover", "--matrix", "hand.csv", "--support", "3:+"], d);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(json(&ok)["recovers"], true);
    let bad = run(&["recover", "--matrix", "hand.csv", "--support", "1:+,2:+"], d);
    assert_eq!(bad.status.code(), Some(1));
    let nb = run(&["neighborly", "--matrix", "hand.csv", "--mode", "central", "--mmax", "2", "--budget", "1e6"], d);
    assert_eq!(nb.status.code(), Some(0));
    let v = json(&nb);
    assert_eq!(v["verified_order"], 1);
    assert_eq!(v["failures_at_next"][0]["indices"], serde_json::json!([0, 1]));
    let cc = run(&["crosscheck", "--matrix", "hand.csv", "--m", "1"], d);
    assert_eq!(cc.status.code(), Some(0));
    let dec = run(&["decode", "--matrix", "hand.csv", "--y", "1,2,3"], d);
    assert_eq!(dec.status.code(), Some(0));
    // y = A^T (1, 2) exactly
    assert!(json(&dec)["residual_l1"].as_f64().unwrap() < 1e-9);
    let ch = run(&["chaos", "--matrix", "hand.csv", "--m", "2"], d);
    assert!((json(&ch)["chaos"][0]["b_m"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bounds_and_phase() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("p.json"), r#"{"n": 100, "N": 1000}"#).unwrap();
    let b = run(&["bounds", "--formula", "neighborly", "--json", "p.json"], d);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(json(&b)["result"]["m_bar"], 18);
    assert!(String::from_utf8_lossy(&b.stderr).contains("user-supplied"));

    std::fs::write(d.join("cfg.json"), r#"{"n": 8, "N": 16, "m_grid": [0, 2, 8], "trials": 6, "seed": 5}"#).unwrap();
    let p = run(&["phase", "--config", "cfg.json", "--trials", "4", "--out", "phase.csv"], d);
    assert_eq!(p.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("phase.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "m,trials,successes,success_rate,mean_delta_sampled,seed");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("0,4,4,1.000000,"));
}

#[test]
fn selftest_fault_injection_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest", "--tier", "quick", "--inject-face-threshold", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
}
