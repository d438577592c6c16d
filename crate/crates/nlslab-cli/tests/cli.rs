//! Behavior tests for the command-line front end.

use std::path::Path;
use std::process::Command;

fn nlslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlslab"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn constants_subcommand_prints_exact_values() {
    let out = nlslab().args(["constants", "--n", "3"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("c_3 = 1/5824"));
    assert!(stdout.contains("b_3 = 5824"));
    assert!(stdout.contains("c_3 * b_3 = 1 (exact)"));

    let out = nlslab().args(["constants", "--n", "4"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("c_4 = 1/2652"));
    assert!(stdout.contains("b_4 = 2652"));

    let out = nlslab().args(["constants", "--n", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let out = nlslab().args(["no-such-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = nlslab().output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");

    // minimal config parses and fills defaults
    write(&cfg, "n = 3\nc = 0.0001\n");
    let out = nlslab()
        .args(["simulate"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("ok"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // unsupported dimension names the invariant
    write(&cfg, "n = 5\nc = 0.0001\n");
    let out = nlslab()
        .args(["simulate"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("bad1"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("n in {3, 4}"), "stderr: {stderr}");

    // c at or above the critical constant cites the constraint
    write(&cfg, "n = 3\nc = 0.0002\n");
    let out = nlslab()
        .args(["simulate"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("bad2"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("0 < c < c_n"), "stderr: {stderr}");

    // unknown keys are a hard error
    write(&cfg, "n = 3\nc = 0.0001\nnot_a_key = 7\n");
    let out = nlslab()
        .args(["simulate"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("bad3"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("unknown key `not_a_key`"));

    // missing file
    let out = nlslab()
        .args(["simulate", "/nonexistent/run.cfg", "--out"])
        .arg(dir.path().join("bad4"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_zero_data_gives_zero_energy_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.cfg");
    write(
        &cfg,
        "n = 3\nc = 0.0001\ngrid_points = 64\nr_max = 10\nt_final = 0.1\ndt = 0.01\namplitude = 0\n",
    );
    let out_dir = dir.path().join("zero-run");
    let out = nlslab()
        .args(["simulate"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let scalars = std::fs::read_to_string(out_dir.join("scalars.csv")).unwrap();
    for line in scalars.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0, "energy column");
    }
}

#[test]
fn simulate_is_deterministic_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("det.cfg");
    write(
        &cfg,
        "n = 3\nc = 0.0001\ngrid_points = 128\nr_max = 12\nt_final = 0.05\ndt = 1e-3\nseed = 42\namplitude = 0.2\n",
    );
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = nlslab()
            .args(["simulate"])
            .arg(&cfg)
            .args(["--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(out_dir.join("scalars.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn blowup_exits_three_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("blow.cfg");
    write(
        &cfg,
        "n = 3\nc = 0.0001\ngrid_points = 64\nr_max = 10\nt_final = 0.1\ndt = 0.01\namplitude = 2e10\n",
    );
    let out_dir = dir.path().join("blow-run");
    let out = nlslab()
        .args(["simulate"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(out_dir.join("scalars.csv").exists());
}

#[test]
fn bourgain_single_interval_family() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.txt");
    write(&fam, "0.0 1.0\n");
    let out = nlslab()
        .args(["bourgain"])
        .arg(&fam)
        .args(["--eta", "0.3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("K = 1"));
    assert!(stdout.contains("verification: PASS"));

    // malformed family: validation exit
    write(&fam, "1.0 0.5\n");
    let out = nlslab()
        .args(["bourgain"])
        .arg(&fam)
        .args(["--eta", "0.3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn checkpoint_resume_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(
        &cfg,
        "n = 3\nc = 0.0001\ngrid_points = 64\nr_max = 10\nt_final = 0.05\ndt = 5e-3\namplitude = 0.3\n",
    );
    let first = dir.path().join("first");
    assert!(nlslab()
        .args(["simulate"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&first)
        .output()
        .unwrap()
        .status
        .success());
    // resume from the final checkpoint of the first run
    let mut ckpts: Vec<_> = std::fs::read_dir(first.join("fields"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    ckpts.sort();
    let last = ckpts.last().unwrap().display().to_string();
    let cfg2 = dir.path().join("resume.cfg");
    write(
        &cfg2,
        &format!(
            "n = 3\nc = 0.0001\ngrid_points = 64\nr_max = 10\nt_final = 0.05\ndt = 5e-3\ninit = checkpoint\ncheckpoint_path = {last}\n"
        ),
    );
    let second = dir.path().join("second");
    let out = nlslab()
        .args(["simulate"])
        .arg(&cfg2)
        .args(["--out"])
        .arg(&second)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn diagnose_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(
        &cfg,
        "n = 3\nc = 0.0001\ngrid_points = 128\nr_max = 12\nt_final = 0.1\ndt = 2e-3\nsample_every = 5\namplitude = 0.1\n",
    );
    let run_dir = dir.path().join("run");
    assert!(nlslab()
        .args(["simulate"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&run_dir)
        .output()
        .unwrap()
        .status
        .success());
    let out = nlslab().args(["diagnose"]).arg(&run_dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(run_dir.join("diagnostics.csv")).unwrap();
    assert!(report.starts_with("check,lhs,rhs,ratio,pass,tolerance"));
    assert!(report.contains("morawetz"));
    assert!(report.contains("mass_control"));

    // partition writes an interval family parseable by the bourgain cmd
    let out = nlslab().args(["partition"]).arg(&run_dir).output().unwrap();
    assert!(out.status.success());
    let fam = run_dir.join("intervals.txt");
    assert!(fam.exists());
    let out = nlslab()
        .args(["bourgain"])
        .arg(&fam)
        .args(["--eta", "0.25"])
        .output()
        .unwrap();
    assert!(out.status.success());
}
