use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn cli(args: &[&str], out: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spacelike-mcf"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SPACELIKE_MCF_THREADS", "1")
        .output()
        .unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn verify_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("dirichlet_maximal.toml");
    let o = cli(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(!text(&o).contains("FAIL"));
    for f in ["diagnostics.csv", "results.json"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    assert!(std::fs::read_dir(dir.path().join("snapshots")).unwrap().count() > 1);
    let results: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(results["pass"], serde_json::Value::Bool(true));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("dirichlet_maximal.toml");
    let o = cli(&["verify", "--config", cfg.to_str().unwrap(), "--override", "verify.boundary_h_constant=0"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    assert!(text(&o).contains("FAIL dirichlet_boundary_h"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("dirichlet_maximal.toml");
    let c = cfg.to_str().unwrap();
    for args in [
        vec!["run", "--config", c, "--override", "flow.t_ned=1"],
        vec!["run", "--config", c, "--override", "flow.t_end=-1"],
        vec!["run", "--config", "/nonexistent/config.toml"],
        vec!["run"],
        vec!["g2", "--config", c],
        vec!["oracle", "--override", "flow.t_end=1"],
        vec!["bogus"],
    ] {
        let o = cli(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", text(&o));
    }
}

#[test]
fn thread_cap_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spacelike-mcf"))
        .args(["oracle", "--out"])
        .arg(dir.path())
        .env("SPACELIKE_MCF_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
