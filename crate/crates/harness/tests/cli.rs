use std::fs;
use std::path::Path;
use std::process::Command;

use opencd_harness::config::{
    BathConfig, CdConfig, CdKind, InitialChoice, ModelConfig, OneOrMany, RunConfig, SweepConfig,
};
use opencd_harness::run::{cmd_run, cmd_sweep};
use proptest::prelude::*;

const QUICK: &str = r#"
name = "quick"
tau = [1.0, 3.0]
model = { kind = "qubit" }

[bath]
eta_g2 = 1e-3

[integrator]
samples = 11

[[cd]]
label = "none"
mode = "none"

[[cd]]
label = "exact"
mode = "exact"
"#;

fn quick() -> RunConfig {
    RunConfig::from_toml_str(QUICK).unwrap()
}

fn opencd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_opencd"));
    c.env_remove("OPENCD_OUT_DIR");
    c
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn run_writes_csv_contract_and_summary() {
    let out = tempfile::tempdir().unwrap();
    let rec = cmd_run(&quick(), out.path()).unwrap();
    assert_eq!(rec.trajectories.len(), 4);
    let dir = out.path().join("quick");
    assert_eq!(csv_files(&dir).len(), 4);
    let text = fs::read_to_string(dir.join("exact_eta0.001_tau3.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "s,P_minus,fidelity,jb_overlap_0,jb_overlap_1,jb_overlap_2,jb_overlap_3,trace_error,min_eig"
    );
    assert_eq!(text.lines().count(), 12);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config_hash"], quick().hash().unwrap());
    assert_eq!(summary["trajectories"].as_array().unwrap().len(), 4);
    let saved = RunConfig::from_file(&dir.join("config.toml")).unwrap();
    assert_eq!(saved, quick());
}

#[test]
fn runs_are_byte_for_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_run(&quick(), a.path()).unwrap();
    cmd_run(&quick(), b.path()).unwrap();
    let (da, db) = (a.path().join("quick"), b.path().join("quick"));
    for name in csv_files(&da) {
        assert_eq!(fs::read(da.join(&name)).unwrap(), fs::read(db.join(&name)).unwrap(), "{name}");
    }
    assert_eq!(fs::read(da.join("summary.json")).unwrap(), fs::read(db.join("summary.json")).unwrap());
}

#[test]
fn sweep_records_failed_cells_and_continues() {
    let mut cfg = quick();
    cfg.cd.truncate(1);
    cfg.sweep = Some(SweepConfig {
        tau: vec![1.0, -1.0],
        ..Default::default()
    });
    let out = tempfile::tempdir().unwrap();
    let rec = cmd_sweep(&cfg, out.path()).unwrap();
    assert_eq!(rec.cells.len(), 2);
    assert_eq!(rec.failures, 1);
    let root = out.path().join("quick_sweep");
    assert!(root.join("sweep.json").exists());
    let table = fs::read_to_string(root.join("sweep_summary.csv")).unwrap();
    assert!(table.lines().any(|l| l.contains("error")));
    assert!(table.lines().any(|l| l.ends_with(",ok")));
}

#[test]
fn sweep_without_lists_is_a_single_run() {
    let mut cfg = quick();
    cfg.sweep = Some(SweepConfig::default());
    let out = tempfile::tempdir().unwrap();
    let rec = cmd_sweep(&cfg, out.path()).unwrap();
    assert_eq!(rec.cells.len(), 1);
    assert_eq!(rec.failures, 0);
    assert_eq!(csv_files(&out.path().join("quick_sweep").join("quick")).len(), 4);
}

#[test]
fn cli_fig1_preset_writes_nine_trajectories() {
    let out = tempfile::tempdir().unwrap();
    let status = opencd()
        .args(["run", "--preset", "fig1", "--threads", "2", "--out-dir"])
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(csv_files(&out.path().join("fig1")).len(), 9);
}

#[test]
fn cli_config_overrides_preset_and_env_sets_default_dir() {
    let out = tempfile::tempdir().unwrap();
    let over = out.path().join("over.toml");
    fs::write(&over, "name = \"fig1_short\"\ntau = [1.0]\n[integrator]\nsamples = 5\n").unwrap();
    let status = opencd()
        .env("OPENCD_OUT_DIR", out.path())
        .args(["run", "--preset", "fig1", "--config"])
        .arg(&over)
        .status()
        .unwrap();
    assert!(status.success());
    let dir = out.path().join("fig1_short");
    assert_eq!(csv_files(&dir).len(), 3);
    let text = fs::read_to_string(dir.join("none_eta0.0001_tau1.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn cli_rejects_bad_input() {
    let out = tempfile::tempdir().unwrap();
    let bad = out.path().join("bad.toml");
    fs::write(&bad, "name = \"x\"\ntau = [1.0]\nbogus = 3\nmodel = { kind = \"qubit\" }\n[[cd]]\nlabel = \"n\"\nmode = \"none\"\n").unwrap();
    let o = opencd().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    assert!(!opencd().args(["run"]).status().unwrap().success());
    assert!(!opencd().args(["run", "--preset", "fig9"]).status().unwrap().success());
}

#[test]
fn cli_validate_writes_report() {
    let out = tempfile::tempdir().unwrap();
    let report = out.path().join("nested").join("report.json");
    let status = opencd().args(["validate", "--seed", "7", "--report"]).arg(&report).status().unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 12);
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    let model = prop_oneof![
        (0.1..5.0_f64, 0.1..5.0_f64).prop_map(|(omega_x, omega_z)| ModelConfig::Qubit { omega_x, omega_z }),
        (1usize..5, 2u32..4).prop_map(|(n, p)| ModelConfig::Pspin { n, p, gamma: 1.0, j: 1.0 }),
    ];
    let bath = prop::option::of(
        (prop::collection::vec(0.0..1e-2_f64, 1..3), 0.5..5.0_f64, any::<bool>()).prop_map(|(eta, t, lamb)| {
            BathConfig {
                eta_g2: if eta.len() == 1 { OneOrMany::One(eta[0]) } else { OneOrMany::Many(eta) },
                temperature: t,
                temperature_mk: None,
                omega_c: 8.0 * std::f64::consts::PI,
                lamb_shift: lamb,
            }
        }),
    );
    (
        "[a-z][a-z0-9_]{0,8}",
        0..=i64::MAX as u64,
        prop::collection::vec(0.1..100.0_f64, 1..4),
        prop_oneof![Just(InitialChoice::Default), Just(InitialChoice::Ground), Just(InitialChoice::Thermal)],
        model,
        bath,
        prop::collection::vec(0.1..10.0_f64, 0..3),
    )
        .prop_map(|(name, seed, tau, initial_state, model, bath, sweep_tau)| {
            let base = RunConfig::from_toml_str(QUICK).unwrap();
            RunConfig {
                name,
                seed,
                tau,
                initial_state,
                model,
                bath,
                cd: vec![
                    CdConfig { label: "none".into(), mode: CdKind::None, terms: vec![], explicit: vec![] },
                    CdConfig { label: "y".into(), mode: CdKind::Variational, terms: vec!["Sy".into()], explicit: vec![] },
                ],
                sweep: if sweep_tau.is_empty() {
                    None
                } else {
                    Some(SweepConfig { tau: sweep_tau, ..Default::default() })
                },
                ..base
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_through_toml(cfg in config_strategy()) {
        let text = cfg.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
    }
}
