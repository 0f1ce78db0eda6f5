use std::path::Path;
use std::process::{Command, Output};

fn dmapx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmapx"))
        .args(args)
        .output()
        .expect("spawn dmapx")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn summary(out: &Output) -> serde_json::Value {
    let line = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(line.trim()).expect("one-line JSON summary")
}

#[test]
fn sample_embed_cluster_chain() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let sub = dir.path().join("sub.csv");
    let emb = dir.path().join("emb.csv");
    let eig = dir.path().join("eig.csv");
    let lab = dir.path().join("lab.csv");

    let out = dmapx(&[
        "sample", "--potential", "doublewell2d", "--n", "400", "--seed", "2", "--burn-in", "2000",
        "--out", p(&pts),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary(&out)["n"], 400);

    let out = dmapx(&["subsample", "--in", p(&pts), "--n", "250", "--seed", "3", "--out", p(&sub)]);
    assert!(out.status.success());
    let rows = std::fs::read_to_string(&sub).unwrap().lines().count();
    assert_eq!(rows, 251);

    let out = dmapx(&[
        "embed", "--in", p(&sub), "--alpha", "0.5", "--epsilon", "auto", "--k", "4",
        "--out-embedding", p(&emb), "--out-eigen", p(&eig),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert!(s["epsilon"].as_f64().unwrap() > 0.0);
    let lambdas: Vec<f64> = s["lambdas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(lambdas.len(), 4);
    assert!((lambdas[0] - 1.0).abs() < 1e-10);
    assert!(lambdas.windows(2).all(|w| w[0] >= w[1]));

    let emb_text = std::fs::read_to_string(&emb).unwrap();
    assert_eq!(emb_text.lines().next().unwrap(), "id,psi1,psi2,psi3");
    assert_eq!(emb_text.lines().count(), 251);
    let eig_text = std::fs::read_to_string(&eig).unwrap();
    assert_eq!(eig_text.lines().next().unwrap(), "j,lambda");
    assert_eq!(eig_text.lines().count(), 5);

    let out = dmapx(&["cluster", "--in", p(&emb), "--out", p(&lab)]);
    assert!(out.status.success());
    let sizes: Vec<u64> = summary(&out)["cluster_sizes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(sizes.iter().sum::<u64>(), 250);
}

#[test]
fn oracle_ou_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("ou.json");
    let out = dmapx(&["oracle-ou", "--n", "4000", "--epsilon", "0.2", "--report", p(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rel = r["rel_errors"].as_array().unwrap();
    assert_eq!(rel.len(), 4);
    for e in &rel[1..] {
        assert!(e.as_f64().unwrap() < 0.1, "{r}");
    }
}

#[test]
fn generator_check_runs() {
    let out = dmapx(&["generator-check", "--alpha", "0", "--epsilon", "0.2", "--n", "2000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert_eq!(s["n_used"], 1600);
    let mad = s["median_abs_dev"].as_f64().unwrap();
    assert!(mad.is_finite() && mad >= 0.0);
}

#[test]
fn usage_errors_exit_2() {
    let out = dmapx(&["embed", "--in", "x.csv", "--alpha", "2", "--epsilon", "0.1",
        "--out-embedding", "e.csv", "--out-eigen", "l.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dmapx(&["embed", "--in", "x.csv", "--alpha", "0", "--epsilon", "-1",
        "--out-embedding", "e.csv", "--out-eigen", "l.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dmapx(&["reproduce", "no-such-recipe", "--out-dir", "/tmp"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dmapx(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dmapx(&[
        "embed", "--in", p(&dir.path().join("absent.csv")), "--alpha", "0", "--epsilon", "0.1",
        "--out-embedding", p(&dir.path().join("e.csv")), "--out-eigen", p(&dir.path().join("l.csv")),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn step_blowup_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dmapx(&[
        "sample", "--potential", "doublewell2d", "--n", "10", "--dt", "10", "--x0", "5,1",
        "--out", p(&dir.path().join("s.csv")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blowup"));
}
