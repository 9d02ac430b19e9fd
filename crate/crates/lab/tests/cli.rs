use std::process::Command;

use oscillab::ResultRecord;

fn oscillab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oscillab"))
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("sq.conf");
    std::fs::write(&conf, "# quick run\nfock-dim = 16\nsamples = 3\ndraws = 32\nseed = 5\nscale = 1\n").unwrap();
    let out = dir.path().join("sq.json");
    let status = oscillab()
        .args(["square-function-check", "--config"])
        .arg(&conf)
        .args(["--seed", "11", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rec = ResultRecord::load(&out).unwrap();
    assert_eq!(rec.config.fock_dim, 16);
    assert_eq!(rec.config.samples, 3);
    assert_eq!(rec.config.seed, 11);
    assert_eq!(rec.config.scale, vec![1.0]);
}

#[test]
fn replay_reproduces_saved_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sq.json");
    let status = oscillab()
        .args(["square-function-check", "--fock-dim", "16", "--samples", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let output = oscillab().arg("replay").arg(&out).output().unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("reproduced bit for bit"));
    let fresh = ResultRecord::from_json(std::str::from_utf8(&output.stdout).unwrap()).unwrap();
    assert!(oscillab::reproduces(&ResultRecord::load(&out).unwrap(), &fresh).unwrap());
}

#[test]
fn csv_tables_land_next_to_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let status = oscillab()
        .args(["square-function-check", "--fock-dim", "16", "--samples", "2", "--format", "csv", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("run.square_ratios.csv").exists());
    assert!(dir.path().join("run.square_kappa.csv").exists());
}

#[test]
fn failing_assertion_sets_exit_code() {
    // 13 dyadic terms is outside the supported range: a configuration error
    let status = oscillab().args(["square-function-check", "--terms", "13"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    // one dyadic term against twelve is far outside the 20% stability band
    let status = oscillab()
        .args(["square-function-check", "--fock-dim", "16", "--samples", "2", "--terms", "1", "--terms", "12"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn unknown_flag_is_rejected() {
    let status = oscillab().args(["verify-heat", "--no-such-flag", "1"]).status().unwrap();
    assert!(!status.success());
}

#[test]
fn mismatched_p_and_q_are_rejected() {
    let status = oscillab().args(["mihlin-sweep", "--p", "2", "--p", "4", "--q", "2"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
