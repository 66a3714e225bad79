use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::{info, warn};
use opencd_core::counterdiabatic::{ansatz_supermatrix, combine, kms_violation, CdMode, CdPoint, CdProvider};
use opencd_core::evolution::{
    evolve, max_leakage, observables, spectrum_track, thermal_state, unpopulated_blocks, ObservableRow,
};
use opencd_core::generator::GeneratorSource;
use opencd_core::models::AnnealingScenario;
use opencd_core::operator::{vectorize, Superoperator};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BathConfig, OneOrMany, RunConfig};
use crate::setup;

/// Overlap below which a Jordan block counts as initially unpopulated.
pub const UNPOPULATED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSample {
    pub s: f64,
    pub residual: f64,
    pub residual_at_zero: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<f64>,
    /// Detailed-balance violation of the dissipative part of the ansatz.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kms_violation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub cd: String,
    pub tau: f64,
    pub eta_g2: f64,
    pub lamb_shift: bool,
    pub initial_state: String,
    pub csv: String,
    pub final_p_minus: f64,
    pub final_fidelity: f64,
    pub min_fidelity: f64,
    pub unpopulated_blocks: Vec<usize>,
    pub max_block_leakage: f64,
    pub max_trace_error: f64,
    pub min_eig: f64,
    pub trace_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub tracking_warnings: usize,
    pub residuals: Vec<ResidualSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub trajectories: Vec<TrajectorySummary>,
}

/// A finished trajectory with its observable table.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: TrajectorySummary,
    pub rows: Vec<ObservableRow>,
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

pub fn csv_name(cd: &str, eta: f64, tau: f64) -> String {
    format!("{cd}_eta{}_tau{}.csv", fmt_num(eta), fmt_num(tau))
}

fn residual_series(
    provider: &CdProvider,
    source: &GeneratorSource,
    samples: &[f64],
) -> Result<Vec<ResidualSample>> {
    if provider.is_none() {
        return Ok(Vec::new());
    }
    let points: Vec<CdPoint> = match provider.cached_points() {
        Some(p) => p.to_vec(),
        None => samples
            .iter()
            .map(|&s| provider.point(source, s))
            .collect::<opencd_core::Result<_>>()?,
    };
    let sc = source.scenario();
    let dissipative: Vec<(usize, Superoperator)> = match provider.mode() {
        CdMode::Variational(terms) if sc.bath().is_some() => terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_constrained())
            .map(|(k, t)| Ok((k, ansatz_supermatrix(t, sc.basis())?)))
            .collect::<opencd_core::Result<_>>()?,
        _ => Vec::new(),
    };
    points
        .into_iter()
        .map(|p| {
            let kms = if dissipative.is_empty() {
                None
            } else {
                Some(kms_of(sc, &dissipative, &p)?)
            };
            Ok(ResidualSample {
                s: p.s,
                residual: p.residual,
                residual_at_zero: p.residual_at_zero,
                coefficients: p.coefficients,
                kms_violation: kms,
            })
        })
        .collect()
}

fn kms_of(sc: &AnnealingScenario, dissipative: &[(usize, Superoperator)], p: &CdPoint) -> Result<f64> {
    let beta = sc.bath().map(|b| b.beta).unwrap_or(f64::INFINITY);
    let gibbs = vectorize(&thermal_state(&sc.hamiltonian(p.s)?, beta)?, sc.basis())?;
    let supers: Vec<Superoperator> = dissipative.iter().map(|(_, m)| m.clone()).collect();
    let coeffs: Vec<f64> = dissipative.iter().map(|(k, _)| p.coefficients[*k]).collect();
    Ok(kms_violation(&combine(&supers, &coeffs)?, &gibbs)?)
}

/// Runs every `(ηg², cd, τ)` trajectory of a manifest without touching the filesystem.
pub fn execute(cfg: &RunConfig) -> Result<Vec<Outcome>> {
    cfg.validate()?;
    let icfg = setup::integrator(cfg);
    let etas = cfg.eta_values();
    let lamb = cfg.bath.as_ref().map(|b| b.lamb_shift).unwrap_or(false);

    let sources: Vec<GeneratorSource> = etas
        .par_iter()
        .map(|&eta| setup::generator_source(cfg, setup::scenario(cfg, eta)?))
        .collect::<Result<_>>()?;

    let mut prov_jobs = Vec::new();
    for (ei, _) in etas.iter().enumerate() {
        for (ci, _) in cfg.cd.iter().enumerate() {
            prov_jobs.push((ei, ci));
        }
    }
    let providers: Vec<(CdProvider, Vec<ResidualSample>)> = prov_jobs
        .par_iter()
        .map(|&(ei, ci)| {
            let src = &sources[ei];
            let cd = &cfg.cd[ci];
            let mode = setup::cd_mode(cd, src.scenario())?;
            let p = CdProvider::new(mode, src).with_context(|| format!("building cd '{}'", cd.label))?;
            let res = residual_series(&p, src, &icfg.sample_grid())?;
            Ok((p, res))
        })
        .collect::<Result<_>>()?;

    let tracks = sources
        .par_iter()
        .map(|src| Ok(spectrum_track(src.scenario(), &icfg.sample_grid())?))
        .collect::<Result<Vec<_>>>()?;
    for (eta, t) in etas.iter().zip(&tracks) {
        for w in &t.warnings {
            warn!("eta_g2 = {eta}: spectral tracking overlap {:.3} at s = {:.4}", w.min_overlap, w.s);
        }
    }

    let mut jobs = Vec::new();
    for (pi, &(ei, ci)) in prov_jobs.iter().enumerate() {
        for &tau in &cfg.tau {
            jobs.push((pi, ei, ci, tau));
        }
    }
    jobs.par_iter()
        .map(|&(pi, ei, ci, tau)| {
            let src = &sources[ei];
            let sc = src.scenario();
            let (provider, residuals) = &providers[pi];
            let label = &cfg.cd[ci].label;
            let init_kind = setup::initial_state(cfg, sc);
            let init = sc.initial_state(init_kind)?;
            let traj = evolve(src, provider, tau, &init, &icfg)
                .with_context(|| format!("cd '{label}', tau = {tau} ns, eta_g2 = {}", etas[ei]))?;
            let rows = observables(&traj, &tracks[ei])?;
            let unpop = unpopulated_blocks(&rows, UNPOPULATED_TOL);
            let last = rows.last().expect("at least two samples");
            let summary = TrajectorySummary {
                cd: label.clone(),
                tau,
                eta_g2: etas[ei],
                lamb_shift: lamb && etas[ei] > 0.0,
                initial_state: format!("{init_kind:?}").to_lowercase(),
                csv: csv_name(label, etas[ei], tau),
                final_p_minus: last.p_minus,
                final_fidelity: last.fidelity,
                min_fidelity: rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min),
                max_block_leakage: max_leakage(&rows, &unpop),
                unpopulated_blocks: unpop,
                max_trace_error: rows.iter().map(|r| r.trace_error).fold(0.0, f64::max),
                min_eig: rows.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min),
                trace_drift: traj.trace_drift,
                accepted_steps: traj.stats.accepted,
                rejected_steps: traj.stats.rejected,
                tracking_warnings: tracks[ei].warnings.len(),
                residuals: residuals.clone(),
            };
            info!(
                "{}: {label} tau = {tau} eta = {} -> P_minus = {:.4}",
                cfg.name, etas[ei], summary.final_p_minus
            );
            Ok(Outcome { summary, rows })
        })
        .collect()
}

pub fn write_csv(path: &Path, rows: &[ObservableRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let blocks = rows.first().map_or(0, |r| r.jb_overlaps.len());
    let mut header = vec!["s".to_string(), "P_minus".into(), "fidelity".into()];
    header.extend((0..blocks).map(|k| format!("jb_overlap_{k}")));
    header.extend(["trace_error".to_string(), "min_eig".into()]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![fmt_num(r.s), fmt_num(r.p_minus), fmt_num(r.fidelity)];
        rec.extend(r.jb_overlaps.iter().map(|&v| fmt_num(v)));
        rec.extend([fmt_num(r.trace_error), fmt_num(r.min_eig)]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs a manifest and writes `<out>/<name>/*.csv` plus `summary.json`.
pub fn cmd_run(cfg: &RunConfig, out_dir: &Path) -> Result<ResultRecord> {
    let outcomes = execute(cfg)?;
    let dir = out_dir.join(&cfg.name);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for o in &outcomes {
        write_csv(&dir.join(&o.summary.csv), &o.rows)?;
    }
    let record = ResultRecord {
        name: cfg.name.clone(),
        config_hash: cfg.hash()?,
        seed: cfg.seed,
        trajectories: outcomes.into_iter().map(|o| o.summary).collect(),
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&record)? + "\n")?;
    fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    Ok(record)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub name: String,
    pub eta_g2: Option<f64>,
    pub lamb_shift: Option<bool>,
    pub temperature: Option<f64>,
    pub tau: Option<f64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<ResultRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub name: String,
    pub config_hash: String,
    pub cells: Vec<SweepCell>,
    pub failures: usize,
}

fn or_keep<T: Clone>(v: &[T]) -> Vec<Option<T>> {
    if v.is_empty() {
        vec![None]
    } else {
        v.iter().cloned().map(Some).collect()
    }
}

#[derive(Debug, Clone)]
pub struct CellSpec {
    pub name: String,
    pub eta_g2: Option<f64>,
    pub lamb_shift: Option<bool>,
    pub temperature: Option<f64>,
    pub tau: Option<f64>,
    pub config: RunConfig,
}

/// Every cell of the sweep's cartesian product as a standalone manifest.
pub fn sweep_cells(cfg: &RunConfig) -> Vec<CellSpec> {
    let sw = cfg.sweep.clone().unwrap_or_default();
    let mut cells = Vec::new();
    for eta in or_keep(&sw.eta_g2) {
        for lamb in or_keep(&sw.lamb_shift) {
            for temp in or_keep(&sw.temperature) {
                for tau in or_keep(&sw.tau) {
                    let mut c = cfg.clone();
                    c.sweep = None;
                    let mut parts = Vec::new();
                    if eta.is_some() || lamb.is_some() || temp.is_some() {
                        let mut b = c.bath.clone().unwrap_or(BathConfig {
                            eta_g2: OneOrMany::One(0.0),
                            temperature: 2.23,
                            temperature_mk: None,
                            omega_c: 8.0 * std::f64::consts::PI,
                            lamb_shift: true,
                        });
                        if let Some(e) = eta {
                            b.eta_g2 = OneOrMany::One(e);
                            parts.push(format!("eta{}", fmt_num(e)));
                        }
                        if let Some(l) = lamb {
                            b.lamb_shift = l;
                            parts.push(format!("lamb{l}"));
                        }
                        if let Some(t) = temp {
                            b.temperature = t;
                            b.temperature_mk = None;
                            parts.push(format!("T{}", fmt_num(t)));
                        }
                        c.bath = Some(b);
                    }
                    if let Some(t) = tau {
                        c.tau = vec![t];
                        parts.push(format!("tau{}", fmt_num(t)));
                    }
                    let name = if parts.is_empty() {
                        cfg.name.clone()
                    } else {
                        format!("{}__{}", cfg.name, parts.join("_"))
                    };
                    c.name = name.clone();
                    cells.push(CellSpec {
                        name,
                        eta_g2: eta,
                        lamb_shift: lamb,
                        temperature: temp,
                        tau,
                        config: c,
                    });
                }
            }
        }
    }
    cells
}

/// Runs the cartesian product concurrently; failed cells are recorded and skipped.
pub fn cmd_sweep(cfg: &RunConfig, out_dir: &Path) -> Result<SweepRecord> {
    cfg.validate()?;
    let root: PathBuf = out_dir.join(format!("{}_sweep", cfg.name));
    let cells: Vec<SweepCell> = sweep_cells(cfg)
        .into_par_iter()
        .map(|cell| {
            let (status, record) = match cmd_run(&cell.config, &root) {
                Ok(r) => ("ok".to_string(), Some(r)),
                Err(e) => {
                    warn!("sweep cell {} failed: {e:#}", cell.name);
                    (format!("error: {e:#}"), None)
                }
            };
            SweepCell {
                name: cell.name,
                eta_g2: cell.eta_g2,
                lamb_shift: cell.lamb_shift,
                temperature: cell.temperature,
                tau: cell.tau,
                status,
                record,
            }
        })
        .collect();

    fs::create_dir_all(&root)?;
    let mut w = csv::Writer::from_path(root.join("sweep_summary.csv"))?;
    w.write_record([
        "cell",
        "eta_g2",
        "lamb_shift",
        "tau",
        "cd",
        "final_p_minus",
        "final_fidelity",
        "min_fidelity",
        "max_block_leakage",
        "status",
    ])?;
    for cell in &cells {
        match &cell.record {
            Some(r) => {
                for t in &r.trajectories {
                    w.write_record([
                        cell.name.clone(),
                        fmt_num(t.eta_g2),
                        t.lamb_shift.to_string(),
                        fmt_num(t.tau),
                        t.cd.clone(),
                        fmt_num(t.final_p_minus),
                        fmt_num(t.final_fidelity),
                        fmt_num(t.min_fidelity),
                        fmt_num(t.max_block_leakage),
                        cell.status.clone(),
                    ])?;
                }
            }
            None => w.write_record([
                cell.name.as_str(),
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                cell.status.as_str(),
            ])?,
        }
    }
    w.flush()?;
    let record = SweepRecord {
        name: cfg.name.clone(),
        config_hash: cfg.hash()?,
        failures: cells.iter().filter(|c| c.record.is_none()).count(),
        cells,
    };
    fs::write(root.join("sweep.json"), serde_json::to_string_pretty(&record)? + "\n")?;
    Ok(record)
}
