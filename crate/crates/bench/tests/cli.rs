use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dqd-bench"))
}

#[test]
fn runs_a_small_experiment_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let status = bench()
        .args(["run", "--algorithm", "cma_me", "--domain", "arm", "--dim", "10", "--iterations", "5", "--trials", "2"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(dir.path().join("cma_me_arm").join("trial_1_metrics.csv").exists());
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let out = dir.path().join("out");
    std::fs::write(
        &config,
        format!(
            r#"{{"domain": "lp_rastrigin", "algorithm": "omg_mega", "dim": 10, "iterations": 3, "trials": 1, "out": {:?}}}"#,
            out
        ),
    )
    .unwrap();
    let output = bench().args(["run", "--config"]).arg(&config).args(["--label", "omg_small"]).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert!(out.join("omg_small_lp_rastrigin").join("trial_0_archive.csv").exists());
}

#[test]
fn invalid_configurations_fail() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"domain": "lp_sphere", "algorithm": "map_elites", "unknown_field": 1}"#).unwrap();
    for args in [
        vec!["run".to_string(), "--config".to_string(), bad.display().to_string()],
        vec!["run".into(), "--algorithm".into(), "pga_me".into(), "--iterations".into(), "1".into()],
        vec!["run".into(), "--domain".into(), "maze".into(), "--iterations".into(), "1".into()],
        vec!["run".into(), "--resolution".into(), "0x10".into(), "--iterations".into(), "1".into()],
    ] {
        let output = bench().args(&args).arg("--out").arg(dir.path()).output().unwrap();
        assert!(!output.status.success(), "{args:?} succeeded");
        assert!(!output.stderr.is_empty());
    }
}

#[test]
fn lists_algorithms_and_domains() {
    let output = bench().arg("list").output().unwrap();
    let text = String::from_utf8(output.stdout).unwrap();
    for name in ["map_elites", "cma_mega_adam", "og_map_elites_line", "arm", "lp_rastrigin"] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}
