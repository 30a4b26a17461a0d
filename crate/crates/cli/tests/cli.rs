use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lhedge(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhedge"))
        .args(args)
        .env("LHEDGE_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const RM: &str = r#"{
    "schema": 1,
    "name": "rm",
    "environment": {"kind": "matrix_game_zero_sum", "game": {"source": "rock_paper_scissors"}},
    "potential": {"family": "polynomial", "p": 2.0},
    "rounds": 200
}"#;

#[test]
fn run_writes_csv_into_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RM);
    let out = lhedge(&["run", "--config", &cfg, "--strict"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("rm.csv");
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1 + 2 * 200);

    let audit = lhedge(&["audit", "--csv", csv.to_str().unwrap()], dir.path());
    assert_eq!(audit.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&audit.stdout).contains("rows                400"));
}

#[test]
fn explicit_out_wins_and_json_summary_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RM);
    let target = dir.path().join("custom.csv");
    let out = lhedge(&["run", "--config", &cfg, "--out", target.to_str().unwrap(), "--json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(target.exists());
    assert!(!dir.path().join("rm.csv").exists());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["rounds"], 200);
    assert_eq!(summary["audit_passed"], true);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_schema = write_config(dir.path(), &RM.replace("\"schema\": 1", "\"schema\": 9"));
    assert_eq!(lhedge(&["run", "--config", &bad_schema], dir.path()).status.code(), Some(2));

    let unknown = write_config(dir.path(), &RM.replace("\"rounds\": 200", "\"rounds\": 200, \"colour\": 1"));
    assert_eq!(lhedge(&["run", "--config", &unknown], dir.path()).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(lhedge(&["run", "--config", missing.to_str().unwrap()], dir.path()).status.code(), Some(2));

    let plus_exp = write_config(
        dir.path(),
        r#"{"environment": {"kind": "adversarial_random", "n": 3},
            "potential": {"family": "exponential"}, "algorithm": "phi_regret_plus", "rounds": 5}"#,
    );
    assert_eq!(lhedge(&["run", "--config", &plus_exp], dir.path()).status.code(), Some(2));
}

#[test]
fn tampered_telemetry_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RM);
    assert_eq!(lhedge(&["run", "--config", &cfg], dir.path()).status.code(), Some(0));
    let csv = dir.path().join("rm.csv");
    let text = fs::read_to_string(&csv).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 10 {
                let mut f: Vec<&str> = line.split(',').collect();
                f[5] = "0.5";
                f[9] = "0";
                f.join(",")
            } else {
                line.to_string()
            }
        })
        .collect();
    fs::write(&csv, tampered.join("\n") + "\n").unwrap();
    let out = lhedge(&["audit", "--csv", csv.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("first violation"));
}

#[test]
fn sweep_writes_table_and_entries() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(
        &grid,
        r#"{"base": {"environment": {"kind": "adversarial_random", "n": 3},
                     "potential": {"family": "polynomial", "p": 2.0}, "rounds": 100},
            "axes": {"predictor": ["zero", "last_instant"], "seed": [0, 1]}}"#,
    )
    .unwrap();
    let out = lhedge(&["sweep", "--grid", grid.to_str().unwrap(), "--jobs", "4", "--strict"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert_eq!(String::from_utf8_lossy(&out.stdout), table);
    let csvs = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("00"))
        .count();
    assert!(csvs >= 4);
}
