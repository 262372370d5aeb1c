use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wigner-grav"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn no_partials(dir: &Path) -> bool {
    fs::read_dir(dir).unwrap().all(|e| {
        !e.unwrap()
            .file_name()
            .to_string_lossy()
            .ends_with(".partial")
    })
}

#[test]
fn purity_curve_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("purity.csv");
    let o = run(&["purity-curve", "--output", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let first = fs::read_to_string(&out).unwrap();
    assert_eq!(
        first.lines().next(),
        Some("t_s,gamma_qt,gamma_taylor,gamma_fit")
    );
    let r = rows(&first);
    assert_eq!(r.len(), 101);
    for v in &r[0][1..] {
        assert!((v - 1.0).abs() <= 1e-6);
    }
    assert_eq!(r[25][0], 2.5);
    assert!((r[25][1] - 0.9878).abs() <= 1e-3);
    assert!((r[25][3] - r[25][1]).abs() <= 5e-3);
    assert!(!first.contains('\r'));

    let summary: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("purity.csv.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["experiment"], "purity-curve");
    assert_eq!(summary["marked_row"], 25);
    assert!(summary["metrics"]
        .as_array()
        .unwrap()
        .iter()
        .all(|m| m["pass"] == true && m["basis"].is_string()));

    let o = run(&["purity-curve", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        first,
        "runs are byte-identical"
    );
    assert!(no_partials(dir.path()));
}

#[test]
fn quantum_only_has_two_columns() {
    let o = run(&[
        "purity-curve",
        "--kinds",
        "qt",
        "--t-max",
        "10",
        "--steps",
        "21",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("t_s,gamma_qt"));
    assert!(rows(&csv).iter().all(|r| r.len() == 2));
}

#[test]
fn json_mirror() {
    let o = run(&["potentials", "--format", "json", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["x_rel_over_dx"], -1.0);
    assert_eq!(v["metadata"]["experiment"], "potentials");
}

#[test]
fn negativity_runs() {
    let o = run(&["negativity", "--t-max", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(r, vec![vec![0.0, 0.0, 0.0]]);

    let o = run(&[
        "negativity",
        "--t-max",
        "2.5",
        "--steps",
        "2",
        "--d-over-threshold",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&String::from_utf8(o.stdout).unwrap());
    let nu = r.last().unwrap()[1];
    assert!((0.0014..=0.0020).contains(&nu), "{nu}");
}

#[test]
fn diffusion_and_trajectories_pass() {
    for cmd in ["diffusion-purities", "trajectories"] {
        let o = run(&[cmd]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn failed_checks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("heavy.txt");
    fs::write(&params, "m_kg = 3e-14\n").unwrap();
    let o = run(&[
        "purity-curve",
        "--kinds",
        "qt",
        "--params",
        params.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn errors_exit_two_and_leave_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "m_kg = -1\n").unwrap();
    let o = run(&[
        "potentials",
        "--params",
        bad.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = run(&[
        "purity-curve",
        "--kinds",
        "step",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let missing = dir.path().join("no/such/dir/x.csv");
    let o = run(&["potentials", "--output", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(no_partials(dir.path()));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}
