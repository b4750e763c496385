//! End-to-end tests against the built binary.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chanrev"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chanrev-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Run {
    let mut cmd = bin();
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Diagonal states and a basis pinching: reversible, everything exact.
fn pinching_problem() -> serde_json::Value {
    serde_json::json!({
        "version": "chanrev/1",
        "states": {
            "rho":   {"dim": 2, "data": [[0.6,0],[0,0],[0,0],[0.4,0]]},
            "sigma": {"dim": 2, "data": [[0.3,0],[0,0],[0,0],[0.7,0]]}
        },
        "channel": {
            "kind": "kraus", "in_dim": 2, "out_dim": 2,
            "kraus": [
                [[1,0],[0,0],[0,0],[0,0]],
                [[0,0],[0,0],[0,0],[1,0]]
            ]
        },
        "options": {}
    })
}

fn write_problem(name: &str, value: &serde_json::Value) -> String {
    let path = scratch(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn diagnose_reversible_exits_zero_with_holds() {
    let path = write_problem("pinch.json", &pinching_problem());
    let r = run(&["diagnose", &path], &[]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let report: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report["verdict"], "holds");
    assert!(report["reversible"].as_bool().unwrap());
    assert!(report["recovery_residual"].as_f64().unwrap() <= 1e-10);
    assert!(report["internally_consistent"].as_bool().unwrap());
}

#[test]
fn diagnose_counterexample_exits_two() {
    let cx_path = scratch("fdiv.json");
    let r = run(&["counterexample", "fdiv", "--out", cx_path.to_str().unwrap()], &[]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let text = std::fs::read_to_string(&cx_path).unwrap();
    let file: serde_json::Value = serde_json::from_str(&text).unwrap();
    let diag = &file["diagnostics"];
    assert!(diag["matched_gap"].as_f64().unwrap() <= 1e-10);
    assert!(diag["recovery_residual"].as_f64().unwrap() >= 1e-3);
    assert!(diag["commutator_norm"].as_f64().unwrap() > 1e-6);

    let r = run(&["diagnose", cx_path.to_str().unwrap()], &[]);
    assert_eq!(r.code, 2, "stderr: {}", r.stderr);
    let report: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report["verdict"], "fails");
}

#[test]
fn reports_are_byte_deterministic_and_thread_invariant() {
    let path = write_problem("pinch_det.json", &pinching_problem());
    let a = run(&["diagnose", &path], &[]);
    let b = run(&["diagnose", &path], &[]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout, "reruns must agree byte for byte");

    let c = run(&["diagnose", &path], &[("CHANREV_THREADS", "3")]);
    assert_eq!(c.code, 0, "stderr: {}", c.stderr);
    let mut one: serde_json::Value = serde_json::from_str(&a.stdout).unwrap();
    let mut three: serde_json::Value = serde_json::from_str(&c.stdout).unwrap();
    one["options"]["threads"] = 0.into();
    three["options"]["threads"] = 0.into();
    assert_eq!(one, three, "thread count must not change the findings");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["diagnose", "--nope"], &[]).code, 64);
    assert_eq!(run(&["counterexample", "what"], &[]).code, 64);
    assert_eq!(run(&["nonsense"], &[]).code, 64);
    let path = write_problem("pinch_env.json", &pinching_problem());
    assert_eq!(
        run(&["diagnose", &path], &[("CHANREV_THREADS", "abc")]).code,
        64
    );
}

#[test]
fn data_errors_exit_65() {
    let broken = scratch("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(run(&["diagnose", broken.to_str().unwrap()], &[]).code, 65);

    let mut no_rho = pinching_problem();
    no_rho["states"].as_object_mut().unwrap().remove("rho");
    let path = write_problem("norho.json", &no_rho);
    let r = run(&["diagnose", &path], &[]);
    assert_eq!(r.code, 65);
    assert!(r.stderr.contains("rho"), "stderr: {}", r.stderr);

    let mut bad_version = pinching_problem();
    bad_version["version"] = "chanrev/9".into();
    let path = write_problem("badver.json", &bad_version);
    assert_eq!(run(&["diagnose", &path], &[]).code, 65);

    let mut not_state = pinching_problem();
    not_state["states"]["sigma"]["data"] = serde_json::json!([[5,0],[0,0],[0,0],[0.4,0]]);
    let path = write_problem("notstate.json", &not_state);
    assert_eq!(run(&["diagnose", &path], &[]).code, 65);
}

#[test]
fn numerical_failures_exit_70() {
    // disjoint supports break the relative modular spectrum
    let mut p = pinching_problem();
    p["states"]["rho"]["data"] = serde_json::json!([[0,0],[0,0],[0,0],[1,0]]);
    p["states"]["sigma"]["data"] = serde_json::json!([[1,0],[0,0],[0,0],[0,0]]);
    let path = write_problem("disjoint.json", &p);
    let r = run(&["divergence", &path, "--f", "xlogx"], &[]);
    assert_eq!(r.code, 70, "stderr: {}", r.stderr);
}

#[test]
fn recover_reports_exact_states_on_reversible_input() {
    let path = write_problem("pinch_rec.json", &pinching_problem());
    let r = run(&["recover", &path], &[]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let out: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(out["compressed"], false);
    assert!(out["trace_preserving_residual"].as_f64().unwrap() <= 1e-10);
    let rows = out["recovered"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["state"], "rho");
    for row in rows {
        assert!(row["residual"].as_f64().unwrap() <= 1e-10);
    }
    assert!(!out["kraus"].as_array().unwrap().is_empty());
}

#[test]
fn np_test_at_zero_recovers_the_support() {
    let path = write_problem("pinch_np.json", &pinching_problem());
    let r = run(&["np-test", &path, "--t", "0"], &[]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let out: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let input = &out["rows"][0]["input"];
    // sigma - 0 * rho is sigma itself: full-rank positive part of trace 1
    assert!((input["l1_norm"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((input["positive_part_trace"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(input["positive_rank"], 2);
    let proj = input["positive_projection"].as_array().unwrap();
    assert!((proj[0][0][0].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((proj[1][1][0].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn divergence_and_metric_gaps_vanish_on_reversible_input() {
    let path = write_problem("pinch_gaps.json", &pinching_problem());
    for f in ["xlogx", "inv_one_plus", "one_minus_power:0.5"] {
        let r = run(&["divergence", &path, "--f", f], &[]);
        assert_eq!(r.code, 0, "{f} stderr: {}", r.stderr);
        let out: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
        let gap = out["rows"][0]["gap"].as_f64().unwrap();
        assert!(gap.abs() <= 1e-10, "{f} gap {gap}");
    }
    for f in ["bures", "kubo_mori", "rld", "rich"] {
        let r = run(&["fisher", &path, "--f", f], &[]);
        assert_eq!(r.code, 0, "{f} stderr: {}", r.stderr);
        let out: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
        let row = &out["rows"][0];
        assert!(row["metric_gap"].as_f64().unwrap().abs() <= 1e-9, "{f}");
        assert!(row["chi2_gap"].as_f64().unwrap().abs() <= 1e-9, "{f}");
    }
    let r = run(&["chernoff", &path], &[]);
    assert_eq!(r.code, 0);
    let out: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(out["rows"][0]["gap"].as_f64().unwrap().abs() <= 1e-10);
    let r = run(&["hoeffding", &path, "--r", "0.05"], &[]);
    assert_eq!(r.code, 0);
    let out: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(out["rows"][0]["gap"].as_f64().unwrap().abs() <= 1e-10);
    assert!(out["rows"][0]["input"].as_f64().unwrap() > 0.0);
}

#[test]
fn bures_counterexample_round_trips_through_fisher() {
    let cx_path = scratch("bures.json");
    let r = run(
        &["counterexample", "bures", "--out", cx_path.to_str().unwrap()],
        &[],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let text = std::fs::read_to_string(&cx_path).unwrap();
    let file: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(file["diagnostics"]["matched_gap"].as_f64().unwrap() <= 1e-10);
    assert!(file["diagnostics"]["separating_gap"].as_f64().unwrap() >= 1e-6);

    // the emitted problem file parses back; the full battery rejects it
    let r = run(&["diagnose", cx_path.to_str().unwrap()], &[]);
    assert_eq!(r.code, 2, "stderr: {}", r.stderr);

    // chi^2 for the catalog metrics: Bures may match, Kubo-Mori must not
    let r = run(&["fisher", cx_path.to_str().unwrap(), "--f", "kubo_mori"], &[]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let out: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(out["rows"][0]["metric_gap"].as_f64().unwrap().abs() >= 1e-6);
}
