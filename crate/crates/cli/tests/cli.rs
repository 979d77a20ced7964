use std::fs;
use std::path::Path;
use std::process::Command;

use gamelab::io::{lint_csv, RUNLOG_HEADER, METRICS_HEADER};
use serde_json::Value;

fn gamelab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gamelab"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path) -> i32 {
    gamelab().args(["run", "--config"]).arg(config).arg("--out").arg(out).status().unwrap().code().unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

const ZERO_SUM: &str = r#"{"kind":"nfg_run","game":{"builtin":"zero_sum_1"},"horizon":2000,
  "learners":[{"algorithm":"omd","regularizer":"euclidean","eta":0.25},
              {"algorithm":"omd","regularizer":"euclidean","eta":0.25}]}"#;

#[test]
fn zero_sum_smoke_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zs.json", ZERO_SUM);
    let (o1, o2) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&cfg, &o1), 0);
    assert_eq!(run(&cfg, &o2), 0);
    for f in ["runlog.csv", "metrics.csv", "report.json"] {
        assert_eq!(fs::read(o1.join(f)).unwrap(), fs::read(o2.join(f)).unwrap(), "{f} differs");
    }
    assert_eq!(lint_csv(&o1.join("runlog.csv"), &RUNLOG_HEADER).unwrap(), 2 * 2001);
    assert_eq!(lint_csv(&o1.join("metrics.csv"), &METRICS_HEADER).unwrap(), 2001);
    let rep = report(&o1);
    assert!(rep["audits"].as_array().unwrap().iter().all(|a| a["pass"] == true));
}

#[test]
fn robustness_exits_with_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.json",
        r#"{"kind":"continuous_run","game":{"builtin":"robustness","epsilon":0.05},"method":{"ogd":0.5},"horizon":1000}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(run(&cfg, &out), 3);
    assert_eq!(report(&out)["spectral"]["verdict"]["kind"], "diverge");
    assert_eq!(lint_csv(&out.join("runlog.csv"), &["init", "iter", "norm"]).unwrap(), 1001);
}

#[test]
fn potential_step_fault_is_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "coord.json",
        r#"{"players":2,"action_counts":[2,2],"utilities":[[1,0,0,1],[1,0,0,1]],"phi_table":[1,0,0,1],"weights":[1,1]}"#,
    );
    let base = r#""kind":"potential_run","game":{"file":"coord.json"},"regularizers":["euclidean","euclidean"],"horizon":200,
        "init":{"kind":"given","profile":[[0.9,0.1],[0.1,0.9]]}"#;
    let good = write(dir.path(), "good.json", &format!("{{{base}}}"));
    // twenty times the safe step size
    let bad = write(dir.path(), "bad.json", &format!("{{{base},\"eta\":5.0}}"));
    assert_eq!(run(&good, &dir.path().join("g")), 0);
    let out = dir.path().join("b");
    assert_eq!(run(&bad, &out), 2);
    assert!(report(&out)["violation"]["slack"].as_f64().unwrap() < 0.0);
}

#[test]
fn verify_classes() {
    let out = gamelab().args(["verify", "--game", "szs_1", "--class", "strategically_zero_sum"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["detail"]["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let out = gamelab().args(["verify", "--game", "zero_sum_1", "--class", "constant_sum"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["detail"]["c"].as_f64().unwrap(), 0.0);

    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "p.json", r#"{"players":2,"action_counts":[2,2],"utilities":[[1,-1,-1,1],[-1,1,1,-0.9]]}"#);
    let out = gamelab().args(["verify", "--class", "zero_sum", "--game"]).arg(&g).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["detail"]["result"]["result"], "witness");

    let out = gamelab().args(["verify", "--game", "szs_1", "--class", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_reports() {
    let out = gamelab().args(["analyze", "--builtin", "inefficiency", "--eta", "0.2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut ev: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|p| p[0].as_f64().unwrap()).collect();
    ev.sort_by(f64::total_cmp);
    assert!((ev[0] + 2.0).abs() < 1e-9 && (ev[1] + 1.0).abs() < 1e-9);
    assert_eq!(v["verdict"]["kind"], "converge");

    // AᵀB = [[2,1],[1,2]] is positive definite
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "1,0\n0,1\n");
    let b = write(dir.path(), "b.csv", "2,1\n1,2\n");
    let out = gamelab().arg("analyze").arg("--a").arg(&a).arg("--b").arg(&b).args(["--eta", "0.1"]).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"]["kind"], "diverge");

    let r = write(dir.path(), "r.csv", "1,0,0\n0,1,0\n");
    let out = gamelab().arg("analyze").arg("--a").arg(&r).arg("--b").arg(&r).args(["--eta", "0.1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn suite_runs_every_config() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    fs::create_dir(&suite).unwrap();
    write(&suite, "zs.json", ZERO_SUM);
    write(&suite, "market.json", r#"{"kind":"fisher_run","market":{"buyers":3,"goods":4},"horizon":500,"seed":7}"#);
    write(&suite, "kuhn.json", r#"{"kind":"bspp_run","game":{"builtin":"kuhn"},"horizon":300}"#);
    let out = dir.path().join("out");
    let status = gamelab()
        .env("GAMELAB_WORKERS", "2")
        .args(["run", "--config"])
        .arg(&suite)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(lint_csv(&out.join("market/runlog.csv"), &["iter", "buyer", "spend", "phi", "residual"]).unwrap(), 3 * 501);
    assert_eq!(lint_csv(&out.join("kuhn/gaps.csv"), &["iter", "last_gap", "avg_gap"]).unwrap(), 301);
    assert!(out.join("zs/report.json").is_file());

    let bad = gamelab().env("GAMELAB_WORKERS", "zero").args(["run", "--config"]).arg(&suite).arg("--out").arg(&out).status().unwrap();
    assert_eq!(bad.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "x.json", r#"{"kind":"nfg_run","game":{"builtin":"zero_sum_9"},"horizon":5,"learners":[]}"#);
    assert_eq!(run(&cfg, &dir.path().join("o")), 1);
    let cfg = write(dir.path(), "y.json", "not json");
    assert_eq!(run(&cfg, &dir.path().join("o")), 1);
}
