use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vortex(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vortex"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn scenarios_list_names_every_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&["scenarios", "list"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["corotation", "disk-orbit", "toy-collapse", "groebli-collapse", "hp-near-wall"] {
        assert!(text.contains(name), "{text}");
    }
    assert!(text.contains("[no oracle]"));
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&["run", &config("disk-orbit.toml"), "--out-dir", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("ReachedTEnd"));
    let traj = fs::read_to_string(dir.path().join("res/trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 12);
    assert!(dir.path().join("res/diagnostics.csv").exists());
    assert!(dir.path().join("res/metadata.json").exists());
}

#[test]
fn stride_override_changes_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&["run", &config("disk-orbit.toml"), "--out-dir", "res", "--stride", "0.25"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let traj = fs::read_to_string(dir.path().join("res/trajectory.csv")).unwrap();
    // samples at 0, 0.25, 0.5, 0.75, 1
    assert_eq!(traj.lines().count(), 6);
}

#[test]
fn termination_class_sets_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&["run", &config("toy-collapse.toml"), "--out-dir", "toy"], dir.path());
    assert_eq!(out.status.code(), Some(11));
    assert!(stdout(&out).contains("BoundaryCollapse"));
    assert!(stdout(&out).contains("vortex 1"));
}

#[test]
fn passing_scenario_exits_zero_despite_collapse() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&["scenarios", "run", "groebli-collapse"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("vortices 2 and 3") && text.contains("verdict pass"), "{text}");
    assert!(dir.path().join("out/groebli-collapse/metadata.json").exists());
}

#[test]
fn strict_mode_ignores_satisfied_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&["scenarios", "run", "hp-near-wall", "--strict"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn bad_inputs_map_to_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&["scenarios", "run", "no-such"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("disk-orbit"));

    let out = vortex(&["run", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(3));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[domain]\nkind = \"half-plane\"\n[[vortices]]\nposition = [0.0, 1.0]\nintensity = 0.0\n").unwrap();
    let out = vortex(&["run", &bad.to_string_lossy()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nonzero"), "{}", stderr(&out));

    let out = vortex(&["run", &config("disk-orbit.toml"), "--stride", "-1", "--out-dir", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn sweep_runs_every_match() {
    let dir = tempfile::tempdir().unwrap();
    let src: PathBuf = dir.path().join("cfg");
    fs::create_dir(&src).unwrap();
    for name in ["disk-orbit.toml", "conformal.toml"] {
        fs::copy(config(name), src.join(name)).unwrap();
    }
    let out = vortex(&["sweep", "cfg/*.toml", "--out-dir", "runs"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 2);
    for stem in ["disk-orbit", "conformal"] {
        assert!(dir.path().join("runs").join(stem).join("metadata.json").exists());
    }
    let out = vortex(&["sweep", "nothing/*.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
