use std::path::Path;
use std::process::{Command, Output};

fn jqq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jqq")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, shape: &str, n: &str, agg: &str) -> (String, String) {
    let out = dir.to_str().unwrap();
    let o = jqq(&["gen", "--shape", shape, "--n", n, "--seed", "5", "--agg", agg, "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (format!("{out}/manifest.csv"), format!("{out}/query.toml"))
}

#[test]
fn fig1_count_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let (db, q) = gen(dir.path(), "fig1", "0", "sum");
    let o = jqq(&["count", "--db", &db, "--query", &q]);
    assert_eq!(stdout(&o).trim(), "13");
    let o = jqq(&["classify", "--query", &q]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("intractable-independent-set-3"));
    let o = jqq(&["--format", "json", "classify", "--query", &q]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tractable"], false);
}

#[test]
fn quantile_agrees_with_oracle_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let (db, q) = gen(dir.path(), "path-3", "30", "min");
    let a = jqq(&["--format", "json", "quantile", "--db", &db, "--query", &q, "--phi", "0.3", "--verify"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = jqq(&["--format", "json", "oracle", "--db", &db, "--query", &q, "--phi", "0.3"]);
    let a: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&b)).unwrap();
    assert_eq!(a["weight"], b["weight"]);
    assert_eq!(a["target_index"], b["target_index"]);
    assert!(a["oracle_rank"].is_string());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (db, q) = gen(dir.path(), "product-3", "4", "sum");
    // exact SUM on an intractable query is a domain error
    let o = jqq(&["quantile", "--db", &db, "--query", &q, "--phi", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("independent"));
    let o = jqq(&["quantile", "--db", &db, "--query", &q, "--phi", "0.5", "--epsilon", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = jqq(&["quantile", "--db", &db, "--query", &q, "--phi", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = jqq(&["quantile", "--db", &db]);
    assert_eq!(o.status.code(), Some(2));
    let o = jqq(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_emits_csv() {
    let o = jqq(&["bench", "--shape", "path-2", "--sizes", "16,32", "--sequential"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("shape,n,mode,phi,epsilon,millis,answers"));
    assert_eq!(lines.count(), 2);
}
