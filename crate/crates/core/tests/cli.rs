use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_ergodyn");

const PARX_UNSTABLE: &str = "\
[model]
family = parx
q = 1
beta0 = 1
beta = 0.5
alpha = 0.6
pi = 0.2

[covariate]
family = iid
eta_law = uniform(0, 1)
";

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("exp.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn ergodyn(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().unwrap()
}

#[test]
fn failing_check_exits_two_with_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PARX_UNSTABLE);
    let out = dir.path().join("out");
    let o = ergodyn(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("PA1: fails (gamma=1.1)"), "{report}");
    assert!(report.contains("certificate:"));
    assert!(report.contains("rho_B"));
}

#[test]
fn unknown_key_exits_one_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &PARX_UNSTABLE.replace("alpha = 0.6", "alpha = 0.3\nalpha_1 = 0.3"));
    let o = ergodyn(&["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.alpha_1"));
    assert!(!dir.path().join("report.txt").exists());
}

#[test]
fn command_must_match_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergodyn(&["simulate", "--preset", "parx_var1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.command"));
}

#[test]
fn simulate_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ergodyn(&["simulate", "--preset", "parx_var1", "--print-config"]);
    let path = write_config(dir.path(), &String::from_utf8(cfg.stdout).unwrap());
    let mut csv = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = ergodyn(&["simulate", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        csv.push(std::fs::read(out.join("trajectory.csv")).unwrap());
    }
    assert!(csv.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(csv[0].clone()).unwrap();
    assert!(text.starts_with("t,state_1,state_2,z_1,eps\n"));
    assert!(!text.contains('\r'));
}

#[test]
fn parallel_commands_ignore_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = ergodyn(&["coalescence", "--preset", "coalescence_n3", "--out", out.to_str().unwrap(), "--threads", threads]);
        assert_eq!(o.status.code(), Some(0));
        runs.push((std::fs::read(out.join("coalescence.csv")).unwrap(), std::fs::read(out.join("survival.csv")).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = ergodyn(&["simulate", "--preset", "binary_logit", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out.join("trajectory.csv")).unwrap()
    };
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "c"), run("6", "d"));
}

#[test]
fn counterexample_report_has_growing_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergodyn(&["counterexample", "--preset", "counterexample_l1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("mean gap: grows"));
    assert!(report.contains("verdict: non-convergence"));
    let table = std::fs::read_to_string(dir.path().join("mean_gap.csv")).unwrap();
    assert!(table.starts_with("j,mean_gap,stderr,mean_gap_exact\n"));
}
