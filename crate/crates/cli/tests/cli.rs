use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn paclab(args: &[&str], dir: &Path, envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_paclab"));
    cmd.args(args).current_dir(dir).env_remove("PACLAB_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn body(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

const SWEEP: &str = r#"kind = "upper_sweep"
seed = 11
trials = 4
output = "out.csv"

[consts]
c_z = 0.01

[grid]
n = [300]
tau = [0.1]

[class]
fixtures = ["two_experts", "dsubset_adversary"]
"#;

#[test]
fn version_and_fixtures() {
    let dir = TempDir::new().unwrap();
    let out = paclab(&["version"], dir.path(), &[]);
    assert!(out.status.success());
    assert!(text(&out.stdout).starts_with("paclab "));
    let out = paclab(&["fixtures"], dir.path(), &[]);
    let listing = text(&out.stdout);
    for name in ["two_experts", "realizable_uniform", "noisy_thresholds", "dsubset_adversary"] {
        assert!(listing.contains(name), "{listing}");
    }
}

#[test]
fn run_is_reproducible() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("sweep.toml"), SWEEP).unwrap();
    let first = paclab(&["run", "sweep.toml"], dir.path(), &[]);
    assert!(first.status.success(), "{}", text(&first.stderr));
    let a = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(text(&first.stdout).contains("excess_error:disagreeing_experts"));
    let second = paclab(&["run", "sweep.toml"], dir.path(), &[("PACLAB_THREADS", "8")]);
    assert!(second.status.success());
    let b = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(body(&a), body(&b));
    let meta: Vec<&str> = a.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(meta.iter().any(|l| l.starts_with("# seed=11")));
    assert!(meta.iter().any(|l| l.starts_with("# config_hash=")));
    assert!(!a.contains('\r'));
    // header plus 3 algorithms x 4 trials x 2 cells
    assert_eq!(body(&a).lines().count(), 1 + 24);
}

#[test]
fn config_errors_are_line_numbered() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.toml"), SWEEP.replace("trials = 4", "trials = 4\ntrails = 5")).unwrap();
    let out = paclab(&["run", "bad.toml"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("line 4") && err.contains("trails"), "{err}");

    fs::write(dir.path().join("bad2.toml"), SWEEP.replace("n = [300]", "n = [1]")).unwrap();
    let out = paclab(&["run", "bad2.toml"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("line 10"), "{}", text(&out.stderr));

    let out = paclab(&["run", "missing.toml"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_fails() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    fs::write(dir.path().join("sweep.toml"), SWEEP.replace("out.csv", "blocker/out.csv")).unwrap();
    let out = paclab(&["run", "sweep.toml"], dir.path(), &[]);
    assert!(!out.status.success());
}

#[test]
fn bad_thread_env_is_rejected() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("sweep.toml"), SWEEP).unwrap();
    let out = paclab(&["run", "sweep.toml"], dir.path(), &[("PACLAB_THREADS", "zero")]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("PACLAB_THREADS"));
}

#[test]
fn selftest_writes_three_files() {
    let dir = TempDir::new().unwrap();
    let out = paclab(&["selftest", "--seed", "5", "--instances", "200", "--output", "st"], dir.path(), &[]);
    assert!(out.status.success(), "{}", text(&out.stdout));
    assert!(text(&out.stdout).contains("selftest passed"));
    for f in ["identities.csv", "upper_sweep.csv", "lower_bound.csv"] {
        let csv = fs::read_to_string(dir.path().join("st").join(f)).unwrap();
        assert!(body(&csv).lines().count() > 1, "{f}");
    }
}
