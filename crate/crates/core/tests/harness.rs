use std::fs;
use std::process::Command;

use surflow::diagnostics::Recorder;
use surflow::grid::{Field, Mesh};
use surflow::harness::*;
use surflow::solver::{advance, GridState, Model};
use surflow::tension::SurfaceTension;

fn write(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn small(extra: &str) -> ExperimentConfig {
    parse_config(&format!("scenario = \"S1_drop\"\nn = 32\n{extra}")).unwrap()
}

#[test]
fn outputs_have_the_contracted_shape() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("[solver]\nt_end = 1e-3\n");
    cfg.seed = 3;
    let res = run_single(&cfg).unwrap();
    assert!(res.ledger.all_pass(), "{:?}", res.ledger);
    let files = write_outputs(&res, dir.path()).unwrap();
    assert_eq!(files.len(), 4);

    let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next().unwrap(), SERIES_COLUMNS.join(","));
    assert_eq!(lines.count(), res.steps + 1);
    assert!(!series.contains('\r'));
    let first: Vec<&str> = series.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first.len(), 16);
    assert_eq!(first[0], "0.0000000000000000e0");

    let snap = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("snapshot_1"))
        .unwrap();
    let text = fs::read_to_string(snap).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,h,gamma");
    assert_eq!(text.lines().count(), 33);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["n"], 32);
    let names: Vec<&str> = json["ledger"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["mass_conservation", "energy_inequality", "dissipation_nonnegative", "nonnegativity", "embedding_inequality"] {
        assert!(names.contains(&n));
    }
}

#[test]
fn flat_run_has_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(
        dir.path(),
        "flat.csv",
        &(std::iter::once("x,h,gamma".to_string())
            .chain((0..16).map(|j| format!("{},0.5,1.0", (j as f64 + 0.5) / 16.0)))
            .collect::<Vec<_>>()
            .join("\n")),
    );
    let cfg_path = write(
        dir.path(),
        "flat.toml",
        &format!("scenario = \"custom\"\ninitial_data = \"{}\"\n[solver]\nt_end = 1e-3\n", data.file_name().unwrap().to_string_lossy()),
    );
    let cfg = load_config(&cfg_path).unwrap();
    let res = run_single(&cfg).unwrap();
    assert_eq!(res.final_state().mesh().n(), 16);
    assert!(res.records.iter().all(|r| r.energy.abs() <= 1e-14));
}

#[test]
fn identical_runs_are_byte_identical() {
    let cfg = small("seed = 9\n[solver]\nt_end = 2e-3\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_outputs(&run_single(&cfg).unwrap(), a.path()).unwrap();
    write_outputs(&run_single(&cfg).unwrap(), b.path()).unwrap();
    for f in ["series.csv", "result.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn same_k_twice_has_zero_distance() {
    let cfg = small("[solver]\nt_end = 2e-3\n");
    let model = Model::new(SurfaceTension::sigma_infty(), surflow::solver::ModelMode::Mollified, 8, 16.0).unwrap();
    let st = initial_state(&cfg, 32).unwrap();
    let run = || advance(&st, &cfg.solver, &model, 2e-3, &mut Recorder::new(0)).unwrap();
    assert_eq!(spacetime_l2(&run(), &run()), (0.0, 0.0));
}

#[test]
fn manufactured_constant_state_is_exact_without_source() {
    let m = Mesh::new(32).unwrap();
    let st = GridState::new(Field::constant(m, 2.0), Field::constant(m, 1.0), 0.0).unwrap();
    let model = Model::physical(SurfaceTension::sigma_infty()).unwrap();
    let cfg = small("");
    let traj = advance(&st, &cfg.solver, &model, 1e-3, &mut Recorder::new(0)).unwrap();
    let last = traj.last();
    assert!(last.h.values().iter().all(|&v| (v - 2.0).abs() <= 1e-13));
    assert!(last.gamma.values().iter().all(|&v| (v - 1.0).abs() <= 1e-13));
}

#[test]
fn small_order_study_and_refinement() {
    let cfg = parse_config("scenario = \"MMS\"\n[solver]\nt_end = 2e-3\nnewton_tol = 1e-8\n").unwrap();
    let rep = run_mms_order_study(&cfg, &[16, 32, 64], 0.5).unwrap();
    assert!(rep.orders.iter().all(|&o| o > 1.5), "{:?}", rep.orders);
    assert!(run_mms_order_study(&small(""), &[16, 32], 0.5).is_err());

    let rep = run_refine(&small("[solver]\nt_end = 2e-3\n"), &[16, 32], &[4e-4, 2e-4], 3).unwrap();
    assert_eq!(rep.levels.len(), 2);
    assert!(rep.levels[1].residuals[0].film <= 1e-12);
}

#[test]
fn cli_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_surflow");
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.toml", "scenario = \"S1_drop\"\nn = 16\n[solver]\nt_end = 5e-4\n");
    let out = dir.path().join("out");
    let st = Command::new(exe)
        .args(["run", ok.to_str().unwrap(), "--output-dir", out.to_str().unwrap(), "--seed", "4"])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(String::from_utf8_lossy(&st.stdout).contains("PASS mass_conservation"));
    assert!(out.join("series.csv").exists());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 4);

    let bad = write(dir.path(), "bad.toml", "scenario = \"S1_drop\"\nbogus = 1\n");
    let st = Command::new(exe).args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("bogus"));
}
