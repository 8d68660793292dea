use std::process::{Command, Output};

use serde_json::Value;

fn polyface(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polyface"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("POLYFACE_THREADS", n.to_string()),
        None => cmd.env_remove("POLYFACE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_then_describe() {
    let dir = std::env::temp_dir().join(format!("polyface-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cube.json");
    let path = path.to_str().unwrap();
    let out = polyface(&["gen", "--family", "cube", "--dim", "3", "-o", path], None);
    assert!(out.status.success());
    let d = json(&polyface(&["describe", "-i", path], None));
    assert_eq!(d["f_vector"], serde_json::json!([8, 12, 6]));
    assert_eq!(d["simple"], true);
    assert_eq!(d["euler_holds"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn octahedron_equality_rows() {
    let out = polyface(&["verify-bounds", "--family", "cross", "--dim", "3", "--csv"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let flags: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(flags, ["v", "f", "f"]);
}

#[test]
fn project_reports_gaps() {
    let d = json(&polyface(&["project", "--family", "cube", "--dim", "3", "--direction", "1,3,7"], None));
    let r = &d["projections"][0]["report"];
    assert_eq!(r["shadow_f_vector"], serde_json::json!([6, 6]));
    assert!(r["interior_count"].as_u64().unwrap() >= 1);
    assert!(r["gaps"].as_array().unwrap().iter().all(|g| g["holds"] == true));
}

#[test]
fn rejects_bad_input() {
    // (1,1,-1) spans vertices of the cube and is orthogonal to (1,2,3)
    let out = polyface(&["project", "--family", "cube", "--dim", "3", "--direction", "1,2,3"], None);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(polyface(&["describe"], None).status.code(), Some(2));
    assert_eq!(polyface(&["angles", "--family", "cube", "--samples", "0"], None).status.code(), Some(2));
    assert_eq!(polyface(&["describe", "--family", "cube"], Some(0)).status.code(), Some(2));
}

#[test]
fn angles_on_square() {
    let d = json(&polyface(
        &["angles", "--family", "cube", "--dim", "2", "--samples", "100000", "--directions", "5"],
        None,
    ));
    let vertex_sum = d["angle_sums"][0]["sum"].as_f64().unwrap();
    assert!((vertex_sum - 1.0).abs() < 0.01, "{vertex_sum}");
    assert!(d["perles"].as_array().unwrap().iter().all(|r| r["verdict"] != "FAIL"));
}

#[test]
fn corpus_csv_is_thread_independent() {
    let args = ["corpus", "--dims", "2..4", "--directions", "3", "--samples", "20000", "--seed", "7"];
    let one = polyface(&args, Some(1));
    let three = polyface(&args, Some(3));
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert!(three.status.success());
    assert!(one.stdout.starts_with(b"family,dim,n,k,f_k,"));
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn default_corpus_exits_cleanly() {
    let out = polyface(&["corpus"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 200);
    assert!(!text.contains("=fail"));
}
