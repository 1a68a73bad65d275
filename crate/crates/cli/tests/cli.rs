// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const GAINS: &str = "gamma = 14218.8\nc1 = 177.4\nc2 = 174.4\nki = 1916.0\nkd = 194.2\nm_p = 15.0\n";

fn pmalab(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pmalab"));
    cmd.args(args).env_remove("PMALAB_OUTPUT_DIR");
    if let Some(dir) = out {
        cmd.env("PMALAB_OUTPUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn scenario(dir: &Path, name: &str, extra: &str, gains: &str) -> String {
    write(
        dir,
        name,
        &format!("duration = 1.0\nwindow = [0.5, 1.0]\n{extra}\n[gains]\n{GAINS}{gains}"),
    )
}

#[test]
fn simulate_writes_artifacts_to_env_dir() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("env-out");
    let cfg = scenario(
        tmp.path(),
        "s.toml",
        "[output]\nname = \"short\"",
        "kp = 2473.5\nl1 = 40.0\nl2 = 400.0\n",
    );
    let o = pmalab(&["simulate", &cfg], Some(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["short.csv", "short_summary.txt", "short_summary.toml", "short.gp"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let csv = fs::read_to_string(out.join("short.csv")).unwrap();
    assert!(csv.starts_with("t,x_d,x,x_p,u,S_q,S_p,tau,tau_hat,taudot_hat,saturated\n"));
    assert_eq!(csv.lines().count(), 1002);
    assert!(String::from_utf8_lossy(&o.stdout).contains("IDO-PSMC"));
}

#[test]
fn out_flag_beats_env_dir() {
    let tmp = TempDir::new().unwrap();
    let (env_dir, flag_dir) = (tmp.path().join("env"), tmp.path().join("flag"));
    let cfg = scenario(tmp.path(), "s.toml", "", "kp = 2473.5\nl1 = 40.0\nl2 = 400.0\n");
    let o = pmalab(&["--out", flag_dir.to_str().unwrap(), "simulate", &cfg], Some(&env_dir));
    assert_eq!(code(&o), 0);
    assert!(flag_dir.join("run.csv").is_file());
    assert!(!env_dir.exists());
}

#[test]
fn invalid_config_exits_2() {
    let tmp = TempDir::new().unwrap();
    let bad = write(tmp.path(), "bad.toml", "duration = -1.0\n");
    assert_eq!(code(&pmalab(&["simulate", &bad], Some(tmp.path()))), 2);
    let unknown = write(tmp.path(), "unknown.toml", "no_such_key = 1\n");
    assert_eq!(code(&pmalab(&["simulate", &unknown], Some(tmp.path()))), 2);
    let ok = scenario(tmp.path(), "s.toml", "", "kp = 2473.5\nl1 = 40.0\nl2 = 400.0\n");
    assert_eq!(code(&pmalab(&["family", "no-such-family", &ok], Some(tmp.path()))), 2);
    let missing = tmp.path().join("missing.toml");
    assert_eq!(
        code(&pmalab(&["simulate", missing.to_str().unwrap()], Some(tmp.path()))),
        2
    );
}

#[test]
fn infeasible_gains_exit_3_unless_forced() {
    let tmp = TempDir::new().unwrap();
    let gains = "kp = 0.1\nl1 = 40.0\nl2 = 400.0\n";
    let cfg = scenario(tmp.path(), "s.toml", "", gains);
    let o = pmalab(&["simulate", &cfg], Some(tmp.path()));
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("violation"));
    assert!(!tmp.path().join("run.csv").exists());
    assert_eq!(code(&pmalab(&["--force", "simulate", &cfg], Some(tmp.path()))), 0);

    let file = write(tmp.path(), "g.toml", &format!("[gains]\n{GAINS}{gains}"));
    assert_eq!(code(&pmalab(&["check-gains", &file], None)), 3);
    assert_eq!(code(&pmalab(&["check-gains", "--force", &file], None)), 0);
}

#[test]
fn feasible_gains_pass_the_check() {
    let tmp = TempDir::new().unwrap();
    let file = write(
        tmp.path(),
        "g.toml",
        &format!("[gains]\n{GAINS}kp = 2473.5\nl1 = 40.0\nl2 = 400.0\n[stability]\neps = 1e-4\n"),
    );
    let o = pmalab(&["check-gains", &file], None);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("feasible        true"));
}

#[test]
fn divergence_exits_4() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(
        tmp.path(),
        "s.toml",
        "force = true",
        "kp = 2473.5\nl1 = 2e6\nl2 = 1e12\n",
    );
    let o = pmalab(&["simulate", &cfg], Some(tmp.path()));
    assert_eq!(code(&o), 4);
    // The partial trace is kept.
    assert!(tmp.path().join("run.csv").is_file());
}

#[test]
fn family_writes_one_trace_per_member() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "s.toml", "", "kp = 2473.5\nl1 = 40.0\nl2 = 400.0\n");
    let o = pmalab(&["family", "load-sweep", &cfg], Some(tmp.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "load-sweep_load_0kg.csv",
        "load-sweep_load_2.5kg.csv",
        "load-sweep_load_5kg.csv",
        "load-sweep_summary.txt",
        "load-sweep.gp",
    ] {
        assert!(tmp.path().join(f).is_file(), "missing {f}");
    }
    let summary = fs::read_to_string(tmp.path().join("load-sweep_summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), 4);
}

#[test]
fn tune_writes_history_and_best_gains() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "t.toml",
        "[fa]\nn = 4\nmax_generations = 2\nrng_seed = 3\n[scenario]\nduration = 0.5\nwindow = [0.0, 0.5]\n[scenario.stability]\neps = 1e-3\n[scenario.output]\nname = \"t\"\n",
    );
    let o = pmalab(&["tune", &cfg], Some(tmp.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let history = fs::read_to_string(tmp.path().join("t_history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(lines.next(), Some("generation,best_h,mean_h,feasible_count"));
    assert_eq!(lines.count(), 3);
    let best = fs::read_to_string(tmp.path().join("t_best_gains.toml")).unwrap();
    let check = write(tmp.path(), "best.toml", &best);
    assert_eq!(code(&pmalab(&["check-gains", &check], None)), 0);
}
