//! Runs the `fracdim` binary end to end.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fracdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracdim")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fracdim-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_set_writes_one_row_per_word() {
    let out = fracdim(&["gen-set", "--set", "cantor", "--level", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x_1,weight");
    assert_eq!(lines.len(), 17);
}

#[test]
fn inline_spec_is_accepted() {
    let spec = r#"{"n":1,"r":0.25,"translations":[[0.0],[0.75]]}"#;
    let out = fracdim(&["gen-set", "--set", spec, "--level", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
    assert!(!fracdim(&["gen-set", "--set", "nowhere"]).status.success());
}

#[test]
fn boxdim_reports_cantor_slope() {
    let out = fracdim(&["boxdim", "--set", "cantor", "--level", "12", "--range", "4:9"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("j,N_j"));
    let err = String::from_utf8(out.stderr).unwrap();
    let slope: f64 = err.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((slope - 0.631).abs() < 0.03, "{err}");
}

#[test]
fn estimator_subcommands_emit_csv() {
    let corr = fracdim(&["corrdim", "--set", "interval", "--level", "10", "--pairs", "20000", "--seed", "3"]);
    assert!(corr.status.success());
    assert!(stdout(&corr).starts_with("level,t,sum,pair_count"));
    let graph = fracdim(&["graphdim", "--set", "cantor", "--level", "12", "--s", "0.7", "--seed", "2"]);
    assert!(graph.status.success());
    assert!(stdout(&graph).starts_with("j,count,unresolved"));
    let pre = fracdim(&["premeasure", "--set", "cantor", "--level", "10", "--s", "0.5", "--levels", "12"]);
    assert!(pre.status.success());
    assert_eq!(stdout(&pre).lines().count(), 7);
}

#[test]
fn sweep_writes_artifacts_and_is_repeatable() {
    let dir = scratch("sweep");
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, r#"{"sets":[{"set":"cantor","level":12}],"s_values":[0.3,0.9],"seeds":[1,2]}"#).unwrap();
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let out = fracdim(&["sweep", "--config", cfg.to_str().unwrap(), "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&b).unwrap());
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.join("a.summary.csv").exists());
    assert!(std::fs::read_to_string(dir.join("a.svg")).unwrap().starts_with("<svg"));

    let one = fracdim(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
    assert!(one.status.success());
    assert_eq!(stdout(&one).lines().count(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn failing_rows_set_the_exit_code() {
    let dir = scratch("fail");
    let cfg = dir.join("config.json");
    std::fs::write(
        &cfg,
        r#"{"sets":[{"set":"bogus","level":4},{"set":"cantor","level":12}],"s_values":[0.5],"seeds":[1]}"#,
    )
    .unwrap();
    let out = fracdim(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out).lines().count(), 3);
    assert!(!fracdim(&["sweep"]).status.success());
    std::fs::write(&cfg, r#"{"sets":[],"s_values":[0.5],"seeds":[1],"extra":1}"#).unwrap();
    assert!(!fracdim(&["sweep", "--config", cfg.to_str().unwrap()]).status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn transition_finds_the_kink() {
    let dir = scratch("transition");
    let cfg = dir.join("config.json");
    std::fs::write(
        &cfg,
        r#"{"sets":[{"set":"two-ended-16","level":12}],"s_values":[0.1,0.15,0.2,0.3,0.5,0.7,0.9],"seeds":[1]}"#,
    )
    .unwrap();
    let out = fracdim(&["transition", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().nth(1).unwrap();
    let s_star: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((s_star - 0.25).abs() <= 0.1, "{text}");
    std::fs::remove_dir_all(&dir).unwrap();
}
