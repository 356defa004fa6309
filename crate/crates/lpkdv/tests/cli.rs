//! End-to-end runs of the binary: CSV round trips, exit codes, determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lpkdv::grid::{Grid, Staircase};
use lpkdv::lattice::residual_max;
use lpkdv::painleve::{constraint_max, ReductionParams};
use lpkdv::params::LatticeParams;
use lpkdv::soliton::{soliton_grid, SolitonSpec};
use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpkdv"))
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn soliton_csv_round_trips() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("soliton.csv");
    let out = bin()
        .args(["soliton", "--params", "2,1", "--window", "-10,-10,20,20", "--mode", "0.5,1"])
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = fs::read_to_string(&path).unwrap();
    let (g, prm) = Grid::read_csv(text.as_bytes()).unwrap();
    assert_eq!((g.n_cols(), g.m_rows()), (20, 20));
    assert_eq!(prm, LatticeParams::new(2.0, 1.0).unwrap());
    assert!(residual_max(&g, &prm).unwrap() < 1e-9);
    let mut back = Vec::new();
    g.write_csv(&mut back, &prm).unwrap();
    assert_eq!(text.as_bytes(), &back[..], "re-serialised grid differs");
}

#[test]
fn evolve_reproduces_the_closed_form_from_staircase_legs() {
    let dir = tempdir().unwrap();
    let prm = LatticeParams::new(3.0, 0.5).unwrap();
    let spec = SolitonSpec::one(0.25, 1.0);
    let sg = soliton_grid(&spec, &prm, -5, -5, 10, 10).unwrap();
    let row: Vec<f64> = (-5..5).map(|n| sg.u(n, -5)).collect();
    let col: Vec<f64> = (-5..5).map(|m| sg.u(-5, m)).collect();
    let stair = Staircase::new(-5, -5, row, col).unwrap();
    let mut buf = Vec::new();
    stair.write_csv(&mut buf, &prm).unwrap();
    let spath = dir.path().join("stair.csv");
    fs::write(&spath, &buf).unwrap();

    let gpath = dir.path().join("grid.csv");
    let out = bin()
        .args(["evolve", "--staircase"])
        .arg(&spath)
        .args(["--tol", "1e-9", "--out"])
        .arg(&gpath)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let (g, prm2) = Grid::read_csv(fs::read_to_string(&gpath).unwrap().as_bytes()).unwrap();
    assert_eq!(prm2, prm);
    let mut worst = 0.0f64;
    for (n, m, v) in g.iter_cells() {
        worst = worst.max((v - sg.u(n, m)).abs());
    }
    assert!(worst < 1e-8, "evolved grid drifts from the closed form by {worst:.3e}");
}

#[test]
fn verify_reports_are_deterministic_for_a_fixed_seed() {
    let dir = tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = bin()
            .args(["verify", "--suite", "lax", "--seed", "5", "--out"])
            .arg(p)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr_of(&out));
    }
    let strip = |p: &Path| {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.contains("wallclock_seconds"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(v["suite"], "lax");
    assert_eq!(v["schema"], "1");
    assert!(v["cases"].as_array().is_some_and(|c| !c.is_empty()));
}

#[test]
fn malformed_params_exit_with_the_usage_code() {
    let out = bin().args(["soliton", "--params", "nope", "--mode", "0.5,1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("PARSE"), "{}", stderr_of(&out));
}

#[test]
fn unknown_suite_is_rejected() {
    let out = bin().args(["verify", "--suite", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("INVALID_PARAMS"), "{}", stderr_of(&out));
}

#[test]
fn reduction_rejects_equal_lattice_parameters() {
    let out = bin().args(["painleve", "--params", "2,2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("ZERO_DIFFERENCE"), "{}", stderr_of(&out));
}

#[test]
fn flow_keeps_solutions_on_shell() {
    let dir = tempdir().unwrap();
    let (f1, f2) = (dir.path().join("in.csv"), dir.path().join("out.csv"));
    let out = bin()
        .args(["soliton", "--params", "2,1", "--window", "-32,-2,64,5", "--mode", "0.5,1"])
        .arg("--out")
        .arg(&f1)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let out = bin()
        .args(["flow", "--input"])
        .arg(&f1)
        .args(["--char", r#"{"kind":"Xn","k":0}"#, "--eps", "0.05", "--steps", "5", "--out"])
        .arg(&f2)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let (g, prm) = Grid::read_csv(fs::read_to_string(&f2).unwrap().as_bytes()).unwrap();
    assert!(g.n_cols() >= 2 && g.m_rows() >= 2, "flow consumed the whole window");
    assert!(residual_max(&g, &prm).unwrap() < 1e-6);
}

#[test]
fn painleve_window_respects_the_constraint() {
    let dir = tempdir().unwrap();
    let f = dir.path().join("band.csv");
    let out = bin()
        .args(["painleve", "--w", "1", "--c", "0.1", "--out"])
        .arg(&f)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let (g, prm) = Grid::read_csv(fs::read_to_string(&f).unwrap().as_bytes()).unwrap();
    let rp = ReductionParams::new(1.0, 0.1, prm.p, prm.q).unwrap();
    assert!(constraint_max(&g, &rp).unwrap() < 1e-7);
}

#[test]
fn continuum_subcommand_emits_a_profile() {
    let dir = tempdir().unwrap();
    let f = dir.path().join("volterra.csv");
    let out = bin()
        .args(["continuum", "--kind", "volterra", "--half-width", "80", "--tau", "0.1"])
        .args(["--steps", "5", "--out"])
        .arg(&f)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = fs::read_to_string(&f).unwrap();
    assert!(text.starts_with("# k0="));
    assert!(text.lines().count() > 100);
}
