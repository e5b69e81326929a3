use std::path::Path;
use std::process::{Command, Output};

fn optboost(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optboost"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: serde_json::Value) {
    std::fs::write(dir.join(name), serde_json::to_string_pretty(&body).unwrap()).unwrap();
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synth_then_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = optboost(
        &["synth", "two_gaussians", "--m", "40", "--out", "toy.csv"],
        dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    write_config(
        dir,
        "toy.json",
        serde_json::json!({"run_id": "toy", "dataset": {"path": "toy.csv"}, "rounds": 10}),
    );
    let out = optboost(&["run", "toy.json"], dir);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let run_dir = dir.join("out");
    let rounds = std::fs::read_to_string(run_dir.join("rounds.csv")).unwrap();
    assert_eq!(rounds.lines().count(), 11);
    assert!(rounds.starts_with("t,selected_row,eps_t,alpha_t"));
    let summary = read_json(&run_dir.join("summary.json"));
    assert_eq!(summary["halt"]["reason"], "completed");
    assert_eq!(summary["rounds_completed"], 10);
    assert!(run_dir.join("margins_T10.csv").exists());
    assert!(!run_dir.join("error.json").exists());

    let out = optboost(&["inspect", "out"], dir);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("toy"));
}

#[test]
fn perfect_stump_halts_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("sep.csv"), "x,label\n0,-1\n1,-1\n2,1\n3,1\n").unwrap();
    write_config(
        dir,
        "sep.json",
        serde_json::json!({"run_id": "sep", "dataset": {"path": "sep.csv"}, "rounds": 5}),
    );
    let out = optboost(&["run", "sep.json"], dir);
    assert_eq!(out.status.code(), Some(2));
    let error = read_json(&dir.join("out/error.json"));
    assert_eq!(error["halt"]["reason"], "zero_error");
    assert_eq!(error["rounds_completed"], 0);
}

#[test]
fn bad_config_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_config(
        dir,
        "bad.json",
        serde_json::json!({"run_id": "bad", "dataset": {"path": "missing.csv"}, "rounds": 0}),
    );
    let out = optboost(&["run", "bad.json"], dir);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("rounds"));

    write_config(
        dir,
        "typo.json",
        serde_json::json!({"run_id": "x", "dataset": {"path": "a.csv"}, "roundz": 3}),
    );
    assert_eq!(optboost(&["run", "typo.json"], dir).status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    optboost(
        &[
            "synth", "xor_grid", "--m", "60", "--seed", "4", "--out", "xor.csv",
        ],
        dir,
    );
    let config = |id: &str| {
        serde_json::json!({
            "run_id": id,
            "dataset": {"path": "xor.csv"},
            "rounds": 300,
            "init": {"mode": "random_simplex", "seed": 9},
            "equivalence_eps": 1e-12,
            "split": {"test_fraction": 0.25, "seed": 2},
            "diagnostics": {"weights": true, "matrix": true},
        })
    };
    write_config(dir, "a.json", config("a"));
    write_config(dir, "b.json", config("a"));
    let read_all = || {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.join("out"))
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.sort();
        files
    };
    assert_eq!(optboost(&["run", "a.json"], dir).status.code(), Some(0));
    let first = read_all();
    assert!(first.iter().any(|(n, _)| n == "weights.csv"));
    assert_eq!(optboost(&["run", "b.json"], dir).status.code(), Some(0));
    assert_eq!(first, read_all());
}
