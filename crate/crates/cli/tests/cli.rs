use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn modesheaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modesheaf")).args(args).output().unwrap()
}

fn run_to(name: &str, out: &std::path::Path) -> Output {
    modesheaf(&["run", "--scenario", scenario(name).to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn last_row(csv: &str) -> (Vec<String>, Vec<String>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let last = csv.lines().last().unwrap().split(',').map(String::from).collect();
    (header, last)
}

#[test]
fn single_car_run_finishes_in_the_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("single.csv");
    let o = run_to("single_car.json", &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let (header, last) = last_row(&csv);
    assert_eq!(header, ["step", "time_s", "active_mode", "x", "v", "w_Str", "w_Cu", "event"]);
    assert_eq!(last[2], "Cu");
    assert_eq!(last[4].parse::<f64>().unwrap(), 80.0);
    assert_eq!(last[7], "Finished");
}

#[test]
fn chicane_run_waits_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chicane.csv");
    let o = run_to("two_car_chicane.json", &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("Wait:") && csv.contains("Resume:"));
}

#[test]
fn broken_partition_is_an_axiom_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_to("mutants/bad_partition.json", &dir.path().join("t.csv"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("axiom"), "{}", stderr(&o));
}

#[test]
fn refused_transfer_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = run_to("mutants/narrow_joint_space.json", &out);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.trim_end().ends_with("TransferNotOK"));
}

#[test]
fn both_cars_in_the_chicane_exits_two() {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(scenario("two_car_chicane.json")).unwrap()).unwrap();
    v["two_car"]["offsets_frac"] = serde_json::json!([0.21, 0.22]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("breach.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let o = modesheaf(&["run", "--scenario", path.to_str().unwrap(), "--out", dir.path().join("t.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = modesheaf(&["run", "--scenario", scenario("two_car_slots.json").to_str().unwrap(), "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn sweep_writes_one_trace_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = modesheaf(&[
        "run",
        "--scenario",
        scenario("two_car_chicane.json").to_str().unwrap(),
        "--sweep",
        "2",
        "--dt",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 4);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 4);
}

#[test]
fn check_passes_on_the_single_car() {
    let o = modesheaf(&["check", "--scenario", scenario("single_car.json").to_str().unwrap(), "--probes", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["probes"], 200);
}

#[test]
fn check_flags_the_epsilon_mutant() {
    let o = modesheaf(&["check", "--scenario", scenario("mutants/broken_epsilon.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let vi = report["laws"].as_array().unwrap().iter().find(|l| l["id"] == "vi").unwrap();
    assert_eq!(vi["status"], "fail");
    assert!(vi["witness"].is_object());
}

#[test]
fn check_without_probes_fails() {
    let o = modesheaf(&["check", "--scenario", scenario("single_car.json").to_str().unwrap(), "--probes", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no probes"));
}

#[test]
fn nerve_of_the_three_set_cover_is_a_triangle() {
    let o = modesheaf(&["nerve", scenario("youd_cover.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let c: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(c["maximal_simplices"], serde_json::json!([["α", "β", "γ"]]));
}

#[test]
fn nerve_of_one_set_is_a_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.json");
    std::fs::write(&path, r#"{"ground": "line", "sets": {"U": {"a": {"lo": 0, "hi": 1}}}, "samples": [{"a": 0.5}]}"#).unwrap();
    let o = modesheaf(&["nerve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(c, serde_json::json!({"vertices": ["U"], "maximal_simplices": [["U"]]}));
}

#[test]
fn uncovered_sample_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gap.json");
    std::fs::write(&path, r#"{"ground": "line", "sets": {"U": {"a": {"lo": 0, "hi": 1}}}, "samples": [{"a": 2}]}"#).unwrap();
    assert_eq!(modesheaf(&["nerve", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn product_of_the_car_complex_is_a_tetrahedron() {
    let c = scenario("single_car_complex.json");
    let o = modesheaf(&["product", c.to_str().unwrap(), c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let p: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(p["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(p["maximal_simplices"].as_array().unwrap().len(), 1);
    assert_eq!(p["maximal_simplices"][0].as_array().unwrap().len(), 4);
}

#[test]
fn missing_scenario_exits_one() {
    let o = modesheaf(&["run", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(1));
}
