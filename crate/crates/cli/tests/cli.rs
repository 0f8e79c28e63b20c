use std::process::{Command, Output};

use serde_json::Value;

fn dessin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dessin"))
        .args(args)
        .env_remove("DESSIN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

#[test]
fn zfun_layer_zero_is_one() {
    let o = dessin(&["zfun", "--dmax", "0"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["layers"][0]["poly"], "1");
}

#[test]
fn zfun_second_layer() {
    let o = dessin(&["zfun", "--dmax", "2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["layers"][1]["poly"], "t2 + 1/2*t1^2");
}

#[test]
fn counts_row_as_csv() {
    let o = dessin(&["counts", "--g", "0", "--nplus", "1", "--alpha", "4", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "g,n_plus,n_minus,m,alpha,count\n0,1,3,0,4,1/2\n");
}

#[test]
fn counts_over_all_genera_keep_fractions_as_strings() {
    let o = dessin(&["counts", "--nplus", "1", "--alpha", "4"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["count"], "1/2");
    assert_eq!(rows[1]["g"], 1);
    assert_eq!(rows[1]["count"], "1/4");
}

#[test]
fn counts_with_bivalent_vertices() {
    let o = dessin(&["counts", "--nplus", "1", "--alpha", "1", "--m", "1", "--format", "csv"]);
    assert_eq!(stdout(&o), "g,n_plus,n_minus,m,alpha,count\n0,1,1,1,1,1\n");
}

#[test]
fn mismatched_alpha_is_a_usage_error() {
    let o = dessin(&["counts", "--nplus", "2", "--alpha", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn witt_suite_passes() {
    let o = dessin(&["verify", "--suites", "witt", "--deg-cap", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn unknown_suite_is_rejected() {
    let o = dessin(&["verify", "--suites", "witt,nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
}

#[test]
fn exhausted_budget_has_its_own_exit_code() {
    let o = dessin(&["verify", "--suites", "oracle", "--n-budget", "8"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn zero_caps_are_rejected() {
    let o = dessin(&["verify", "--suites", "loop", "--cap-d", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_dessin"))
            .args(["export", "--kind", "blocks", "--dmax", "2", "--cap-d", "6"])
            .env("DESSIN_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = dessin(&["verify", "--suites", "loop,bergman", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["passed"], true);
}

#[test]
fn tr_reports_pole_data() {
    let o = dessin(&["tr", "--g", "1", "--n", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["check"]["passed"], true);
    assert!(v["omega"]["terms"].as_array().unwrap().iter().all(|t| t["coeff"].is_string()));
}

#[test]
fn tr_rejects_unstable_type() {
    let o = dessin(&["tr", "--g", "0", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
}
