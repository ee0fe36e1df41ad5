use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landau-vws"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn solve_with_seeded_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--seed", "11", "--truncation", "3:3", "--tol", "1e-9"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert_eq!(s["command"], "solve");
    assert_eq!(s["classical"]["estimate_passed"], true);
    let solution = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(solution.lines().count() > 1);
}

#[test]
fn consistency_and_uniqueness_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["consistency", "--schedule", "power:1", "--eps-grid", "3:7"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary(dir.path())["consistency"]["consistent"], true);
    let rows = std::fs::read_to_string(dir.path().join("consistency.csv")).unwrap();
    assert_eq!(rows.lines().count(), 6);

    let dir = tempfile::tempdir().unwrap();
    let out = run(&["uniqueness", "--eps-grid", "3:7"], dir.path());
    assert!(out.status.success());
    assert_eq!(summary(dir.path())["uniqueness"]["decreasing"], true);
}

#[test]
fn net_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("problem.json");
    std::fs::write(
        &config,
        r#"{
            "variant": "CPb", "B": 1.0, "T": 1.5, "s": 0.5,
            "truncation": {"j_max": 1, "n_max": 2},
            "a": {"segments": [{"t_start": 0.0, "t_end": 1.5, "poly_coeffs": [1.0]}], "lower_bound": 1.0},
            "q": {"deltas": [{"t": 0.75, "weight": 2.0}]},
            "data": [{"j": 0, "n": 1, "component": 1, "u0_re": 0.0, "u0_im": 0.0, "u1_re": 1.0, "u1_im": 0.0}]
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = Command::new(env!("CARGO_BIN_EXE_landau-vws"))
        .args(["net", "--eps-grid", "3:9", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out_dir);
    assert_eq!(s["variant"], "CPb");
    assert_eq!(s["net"]["failed"], 0);
    assert!(s["moderateness"]["k0"].is_number());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["scenario", "nope"],
        vec!["net", "--eps-grid", "5:2"],
        vec!["net", "--schedule", "power:-1"],
        vec!["solve", "--truncation", "3"],
        vec!["solve", "--config", "/nonexistent/problem.json"],
    ] {
        let out = run(&args, dir.path());
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}
