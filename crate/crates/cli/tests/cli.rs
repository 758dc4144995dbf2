use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    format!("{}/corpus/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn qtr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtr")).args(args).env_remove("QTR_PRECISION_BITS").output().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qtr-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn validate_exit_codes() {
    assert_eq!(qtr(&["validate", "--curve", &corpus("hermite_n1")]).status.code(), Some(0));
    let bad = tmp("missing_q.json");
    std::fs::write(&bad, r#"{"d": 2, "builder": "quasi_poly", "p_prime": "-x", "q": "x"}"#).unwrap();
    let out = qtr(&["validate", "--curve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`Q`"));
    assert_eq!(qtr(&["validate", "--curve", "/nonexistent/curve.json"]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_one() {
    let out = qtr(&["hirota", "--curve", &corpus("adversarial")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("-1/4"));
    assert_eq!(qtr(&["bergman", "--curve", &corpus("hermite_n1"), "--decoupled"]).status.code(), Some(1));
}

#[test]
fn precision_below_minimum_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_qtr"))
        .args(["--backend", "f256", "validate", "--curve", &corpus("hermite_n2")])
        .env("QTR_PRECISION_BITS", "64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn miura_prints_generators() {
    let out = qtr(&["miura", "--d", "2", "--q", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("W2 = J1*J2 - J2'"), "{text}");
}

#[test]
fn kernel_and_table_files_roundtrip() {
    let curve = corpus("hermite_n1");
    let k = tmp("kernel.json");
    let t = tmp("table.json");
    assert!(qtr(&["bergman", "--curve", &curve, "--out", k.to_str().unwrap()]).status.success());
    let rec = qtr(&["recurse", "--curve", &curve, "--kernel", k.to_str().unwrap(), "--out", t.to_str().unwrap()]);
    assert!(rec.status.success());
    let table: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    assert_eq!(table["convention"], "appendix, rhs -1");
    assert!(table["entries"]["W_0_3[1,1,1]"].is_object());
    let check = qtr(&["loopcheck", "--curve", &curve, "--kernel", k.to_str().unwrap(), "--table", t.to_str().unwrap()]);
    assert!(check.status.success(), "{}", String::from_utf8_lossy(&check.stdout));
}

#[test]
fn resolver_reports_ambiguity_without_roots() {
    let out = qtr(&["resolve-convention", "--curve", &corpus("empty_bethe")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ambiguous: 8"));
}

#[test]
fn corpus_matches_manifest() {
    let out = qtr(&["corpus"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("resolved convention identical"));
}
