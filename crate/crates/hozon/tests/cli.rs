use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
  "samples": {"tuples": 4000, "directions": 2000, "chords": 4, "radial": 1000, "volume": 10000, "star_directions": 2000},
  "grid": 16
"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn hozon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hozon"))
        .args(args)
        .output()
        .unwrap()
}

fn interval_config(dir: &Path) -> PathBuf {
    let body = format!(
        r#"{{"bodies": [{{"name": "interval", "body": {{"type": "box", "dim": 1, "bounds": [[0, 1]]}}}}], "orders": [[1, 2]], {SMALL}}}"#
    );
    write_config(dir, "interval.json", &body)
}

#[test]
fn passing_run_writes_csv_verdicts_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = interval_config(dir.path());
    let out = dir.path().join("runs/zonoid.csv");
    let o = hozon(&[
        "compute-zonoid",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with(
        "body,m,p,q,theta_1,direct,direct_se,spherical,spherical_se,factored,factored_se"
    ));
    assert_eq!(csv.lines().count(), 3);
    let verdicts = std::fs::read_to_string(dir.path().join("runs/zonoid.verdicts.csv")).unwrap();
    assert!(verdicts.starts_with("check,anchor,value,band,pass\n"));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("runs/zonoid.summary.json")).unwrap(),
    )
    .unwrap();
    let rows = summary.as_array().unwrap();
    assert_eq!(rows.len(), verdicts.lines().count() - 1);
    for key in ["check", "anchor", "value", "band", "pass", "seconds"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = interval_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hozon(&[
            "verify-inclusions",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn seed_override_changes_the_estimates() {
    let dir = TempDir::new().unwrap();
    let cfg = interval_config(dir.path());
    let run = |seed: &str| {
        let o = hozon(&[
            "compute-zonoid",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn stdout_mode_prints_both_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = interval_config(dir.path());
    let o = hozon(&["verify-rs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("body,m,ratio,ratio_se,bound\n"));
    assert!(text.contains("\ncheck,anchor,value,band,pass\n"));
    assert!(String::from_utf8(o.stderr).unwrap().contains("\"seconds\""));
}

#[test]
fn failing_row_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"{{"bodies": [{{"name": "square", "body": {{"type": "box", "dim": 2, "bounds": [[0, 1], [0, 1]]}}}}], "rounds": 26, {SMALL}}}"#
    );
    let cfg = write_config(dir.path(), "steiner.json", &body);
    let o = hozon(&["steiner-run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("rounds truncated at 25"));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(
        hozon(&["verify-main", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"bodies": [{"name": "t", "path": "missing.json"}]}"#,
    );
    let o = hozon(&["verify-main", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .contains("missing.json"));
    let cfg = write_config(
        dir.path(),
        "p.json",
        r#"{"bodies": [{"name": "b", "body": {"type": "ball", "dim": 2}}], "p": [0.5]}"#,
    );
    assert_eq!(
        hozon(&["verify-main", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn body_paths_resolve_against_the_config() {
    let dir = TempDir::new().unwrap();
    std::fs::create_dir(dir.path().join("bodies")).unwrap();
    write_config(
        dir.path(),
        "bodies/t.json",
        r#"{"type": "simplex", "dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]]}"#,
    );
    let body = format!(
        r#"{{"bodies": [{{"name": "t", "path": "bodies/t.json"}}], "m": [1, 2], {SMALL}}}"#
    );
    let cfg = write_config(dir.path(), "rs.json", &body);
    let o = hozon(&["verify-rs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
