use std::path::Path;
use std::process::{Command, Output};

fn adoptlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adoptlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn simulate_writes_tables_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"integration": {"tMax": 50.0}}"#);
    let out = tmp.path().join("out");
    let o = adoptlab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = read(&out, "trajectory.csv");
    assert!(traj.starts_with("t,xG,xP,xR,c,alphaBelief,e,inExcursion\n"));
    let manifest: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["params"]["gamma"], 0.3);
    assert!(manifest["provenance"]["version"].is_string());
    assert!(read(&out, "summary.csv").contains("classification,Type1"));
}

#[test]
fn unknown_key_exits_one_and_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"params": {"gama": 0.3}}"#);
    let o = adoptlab(&["simulate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gama"));
}

#[test]
fn cost_ordering_violation_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"params": {"cP": 1.2, "bP": 1.5}}"#);
    let out = tmp.path().join("o");
    let o = adoptlab(&["equilibria", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("c^{(R)} = 0 < c_P < c_G"));
    let failure: serde_json::Value = serde_json::from_str(&read(&out, "failure.json")).unwrap();
    assert_eq!(failure["kind"], "validation");
}

#[test]
fn mismatched_command_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"command": "basins"}"#);
    let o = adoptlab(&["trust", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn manifest_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"params": {"rho": 0.3}, "initial": {"xG": 0.55, "xP": 0.4, "xR": 0.05}, "integration": {"tMax": 80.0}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(adoptlab(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let manifest = a.join("manifest.json");
    assert!(adoptlab(&["simulate", "--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()])
        .status
        .success());
    for name in ["trajectory.csv", "events.csv", "excursions.csv", "summary.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
}

#[test]
fn each_analysis_command_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{
            "basins": {"resolution": 12},
            "sweep": {"variable": "psiDev", "values": [0.0, 0.3]},
            "rho": {"step": 0.05},
            "integration": {"step": 0.05, "tMax": 150.0},
            "scenario": {"schedule": [{"kind": "seed", "start": 0.0, "magnitude": 0.5}]}
        }"#,
    );
    let cases: [(&str, &[&str]); 5] = [
        ("basins", &["basins.csv", "separatrix.csv", "basin_summary.csv", "basin_sweep.csv"]),
        ("equilibria", &["equilibria.csv", "conditions.csv", "tipping_point.csv", "gamma_profile.csv"]),
        ("sweep-rho", &["rho_sweep.csv", "value_adoption.csv", "rho_summary.csv"]),
        ("trust", &["trust.csv"]),
        ("policy", &["trajectory.csv", "welfare.csv", "seeds.csv", "policy_summary.csv"]),
    ];
    for (cmd, files) in cases {
        let out = tmp.path().join(cmd);
        let o = adoptlab(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        for f in files {
            assert!(out.join(f).is_file(), "{cmd} did not write {f}");
        }
        assert!(out.join("manifest.json").is_file());
    }
    let eq = read(&tmp.path().join("equilibria"), "equilibria.csv");
    assert!(eq.contains("corner_R,0.0,0.0,1.0"), "{eq}");
    assert!(eq.contains("edge_GP_interior"), "{eq}");
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = adoptlab(&["simulate", "--config", tmp.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
