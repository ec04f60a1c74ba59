use std::path::Path;
use std::process::{Command, Output};

fn narrowing(dir: &Path, args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_narrowing"));
    cmd.current_dir(dir).args(args);
    if let Some(n) = threads {
        cmd.env("NARROWING_THREADS", n.to_string());
    }
    cmd.output().expect("binary runs")
}

fn summary(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn rs_trace_has_one_row_per_pull() {
    let dir = tempfile::tempdir().unwrap();
    let out = narrowing(
        dir.path(),
        &[
            "run", "--algo", "rs", "--dim", "1", "--p", "1", "--budget", "16", "--seed", "1",
            "--out", "o",
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("o/run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
    assert!(dir.path().join("o/run.gp").exists());
}

#[test]
fn blin_seed_seven_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = narrowing(
        dir.path(),
        &[
            "run",
            "--algo",
            "blin",
            "--objective",
            "gp",
            "--dim",
            "4",
            "--p",
            "5",
            "--budget",
            "2^19",
            "--seed",
            "7",
            "--out",
            "o",
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("o/run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let s = summary(&dir.path().join("o/run.summary.json"));
    let run = &s["runs"][0]["summary"];
    let regret = run["simple_regret"].as_f64().unwrap();
    assert!(regret > 0.0);
    assert!((regret - 5.960464455334602e-9).abs() < 1e-18);
    assert_eq!(run["total_batches"], 2);
    assert_eq!(run["total_pulls"], 69632);
    assert_eq!(s["config"]["schedule"], "ace-blin");
    assert_eq!(s["config"]["arm_rule"], "center");
}

#[test]
fn noisy_mos_without_density_floor_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = narrowing(
        dir.path(),
        &["run", "--algo", "blin-mos", "--noise", "none", "--out", "o"],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa_p"));
    assert!(!dir.path().join("o/run.csv").exists());
}

#[test]
fn outputs_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run", "--algo", "blin-mos", "--budget", "2^14", "--seeds", "0..4", "--out", "o",
    ];
    let mut seen: Option<(Vec<u8>, Vec<u8>)> = None;
    for threads in [1, 3, 1] {
        let out = narrowing(dir.path(), &args, Some(threads));
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let csv = std::fs::read(dir.path().join("o/run.csv")).unwrap();
        let json = std::fs::read(dir.path().join("o/run.summary.json")).unwrap();
        if let Some((c, j)) = &seen {
            assert_eq!(c, &csv);
            assert_eq!(j, &json);
        }
        seen = Some((csv, json));
    }
}

#[test]
fn sweep_needs_three_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let out = narrowing(
        dir.path(),
        &[
            "sweep",
            "--algo",
            "blin",
            "--budgets",
            "2^12,2^13",
            "--out",
            "o",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o/sweep.csv").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"algo": "rs", "objective": "gp", "dim": 2, "p": 2, "budget": 32, "seeds": [0, 1]}"#,
    )
    .unwrap();
    let out = narrowing(
        dir.path(),
        &["run", "--config", "c.json", "--budget", "8", "--out", "o"],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(&dir.path().join("o/run.summary.json"));
    assert_eq!(s["config"]["budget"], 8);
    assert_eq!(s["config"]["dim"], 2);
    assert_eq!(s["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"algo": "rs", "budgt": 8}"#).unwrap();
    let out = narrowing(dir.path(), &["run", "--config", "c.json"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = narrowing(
        dir.path(),
        &["bounds", "--dim", "4", "--p", "5", "--budget", "2^19"],
        None,
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        v["schedule_prefix"].as_array().unwrap()[..6]
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect::<Vec<_>>(),
        [0.125, 0.0625, 0.0625, 0.03125, 0.03125, 0.015625]
    );
}
