use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cavity-moments"));
    cmd.env("RUST_LOG", "error");
    cmd
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn pipeline_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = exe()
        .args(["pipeline", "--config"])
        .arg(config("single_disk.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "moments.csv",
        "atoms.csv",
        "reconstruction.svg",
        "report.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["rank"], 1);
    assert_eq!(report["mass_convention"], "4pi");
    let radius = report["disks"][0]["radius"].as_f64().unwrap();
    assert!((radius - 0.08).abs() < 1e-6, "{radius}");
}

#[test]
fn reconstruct_from_moment_file() {
    let dir = tempfile::tempdir().unwrap();
    let moments = dir.path().join("tau.csv");
    let out = exe()
        .args(["moments", "--config"])
        .arg(config("two_disks.json"))
        .args(["--nodes", "128", "--n-atoms", "3", "--out"])
        .arg(&moments)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let atoms = dir.path().join("atoms.csv");
    let out = exe()
        .args(["reconstruct", "--moments"])
        .arg(&moments)
        .args(["--n-atoms", "3", "--mass-convention", "2pi", "--out"])
        .arg(&atoms)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&atoms).unwrap();
    assert!(text.starts_with("# mass_convention=2pi\nre_z,im_z,re_c,im_c,radius\n"));
    assert_eq!(text.lines().count(), 5);

    let svg = dir.path().join("scene.svg");
    let out = exe()
        .args(["render", "--config"])
        .arg(config("two_disks.json"))
        .arg("--atoms")
        .arg(&atoms)
        .arg("--out")
        .arg(&svg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let doc = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(doc.matches(r#"fill="red""#).count(), 3);
}

#[test]
fn forward_dumps_operators() {
    let dir = tempfile::tempdir().unwrap();
    let out = exe()
        .args(["forward", "--config"])
        .arg(config("single_disk.json"))
        .args(["--nodes", "32", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["lambda_gamma", "lambda_0", "r"] {
        let text = std::fs::read_to_string(dir.path().join(format!("{name}.csv"))).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 32);
        assert!(rows.iter().all(|r| r.split(',').count() == 32));
    }
}

#[test]
fn oracle_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = exe()
        .args(["oracle", "--config"])
        .arg(config("two_disks.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("two_disk_series.csv").exists());
    assert!(dir.path().join("oracle_moments.csv").exists());

    let out = exe()
        .args(["oracle", "--config"])
        .arg(config("multi.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no analytic oracle"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"outer": {"kind": "circle", "center": [0, 0], "radius": 0.4}, "meshes": {}}"#,
    )
    .unwrap();
    let out = exe()
        .args(["pipeline", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("meshes"));

    let out = exe()
        .args(["pipeline", "--config"])
        .arg(config("single_disk.json"))
        .args(["--nodes", "33"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    std::fs::write(
        &bad,
        r#"{"outer": {"kind": "circle", "center": [0, 0], "radius": 0.4},
            "cavities": [{"kind": "circle", "center": [0.35, 0], "radius": 0.1}]}"#,
    )
    .unwrap();
    let out = exe()
        .args(["pipeline", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = dir.path().join("zero.csv");
    std::fs::write(&zeros, "m,re,im\n0,0,0\n1,0,0\n2,0,0\n3,0,0\n").unwrap();
    let out = exe()
        .args(["reconstruct", "--moments"])
        .arg(&zeros)
        .args(["--n-atoms", "2", "--out"])
        .arg(dir.path().join("atoms.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}
