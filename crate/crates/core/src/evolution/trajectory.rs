use log::warn;
use nalgebra::DVector;

use crate::counterdiabatic::{CdMode, CdProvider};
use crate::error::{Error, Result};
use crate::evolution::integrator::{integrate, IntegratorConfig, StepStats};
use crate::evolution::observables::{cptp_diagnostics, ground_state_probability, uhlmann_fidelity};
use crate::generator::GeneratorSource;
use crate::models::AnnealingScenario;
use crate::operator::{devectorize, re, CoherenceVector};
use crate::spectral::{jb_overlaps, SpectrumTrack};

/// Sampled solution of `dr/ds = (τ 𝕃_0(s) + 𝔸_s) r` on `s ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scenario: AnnealingScenario,
    pub cd: CdMode,
    /// Anneal time in ns.
    pub tau: f64,
    pub samples: Vec<f64>,
    pub states: Vec<CoherenceVector>,
    pub stats: StepStats,
    /// `max_s |Tr ρ(s) − Tr ρ(0)|`.
    pub trace_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &CoherenceVector {
        self.states.last().expect("a trajectory has at least two samples")
    }
}

pub fn evolve(
    source: &GeneratorSource,
    cd: &CdProvider,
    tau: f64,
    init: &CoherenceVector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            domain: "(0, ∞)",
        });
    }
    let basis = source.scenario().basis().clone();
    if init.basis().dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: init.basis().dim(),
        });
    }
    if init.max_imag() > 1e-12 {
        return Err(Error::InvalidState("initial coherence vector is not real".into()));
    }
    let tr0 = init.trace();
    if (tr0 - re(1.0)).norm() > 1e-8 {
        return Err(Error::InvalidState(format!("initial trace {tr0} differs from one")));
    }

    let y0 = init.coeffs().map(|z| z.re);
    let rhs = |s: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let mut m = source.l0_real(s)? * tau;
        if let Some(a) = cd.a_real(source, s)? {
            m += a;
        }
        Ok(m * y)
    };
    let sol = integrate(rhs, y0, cfg)?;

    let d = basis.dim() as f64;
    let mut trace_drift = 0.0_f64;
    let mut states = Vec::with_capacity(sol.states.len());
    for (s, y) in sol.samples.iter().zip(sol.states) {
        let drift = ((y[0] - tr0.re / d) * d).abs();
        if !(drift <= 100.0 * cfg.rel_tol) {
            return Err(Error::IntegrationInvalid { s: *s, drift });
        }
        trace_drift = trace_drift.max(drift);
        states.push(CoherenceVector::new(basis.clone(), y.map(re))?);
    }
    Ok(Trajectory {
        scenario: source.scenario().clone(),
        cd: cd.mode().clone(),
        tau,
        samples: sol.samples,
        states,
        stats: sol.stats,
        trace_drift,
    })
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRow {
    pub s: f64,
    pub p_minus: f64,
    pub ground_multiplicity: usize,
    /// `NaN` when the state has left the positive cone beyond the fidelity slack.
    pub fidelity: f64,
    pub jb_overlaps: Vec<f64>,
    pub trace_error: f64,
    pub min_eig: f64,
}

/// Tracked Jordan spectra of `𝕃_0` on the trajectory's sample grid.
pub fn spectrum_track(scenario: &AnnealingScenario, samples: &[f64]) -> Result<SpectrumTrack> {
    SpectrumTrack::build(samples, |s| scenario.lindbladian(s))
}

pub fn observables(traj: &Trajectory, track: &SpectrumTrack) -> Result<Vec<ObservableRow>> {
    if track.grid.len() != traj.samples.len() {
        return Err(Error::DimensionMismatch {
            expected: traj.samples.len(),
            found: track.grid.len(),
        });
    }
    let sc = &traj.scenario;
    let mut rows = Vec::with_capacity(traj.samples.len());
    for ((&s, r), spec) in traj.samples.iter().zip(&traj.states).zip(&track.spectra) {
        let h = sc.hamiltonian(s)?;
        let gp = ground_state_probability(r, &h)?;
        let rho = devectorize(r);
        let fidelity = match uhlmann_fidelity(&sc.adiabatic_state(s)?, &rho) {
            Ok(f) => f,
            Err(Error::InvalidState(msg)) => {
                warn!("fidelity undefined at s = {s:.4}: {msg}");
                f64::NAN
            }
            Err(e) => return Err(e),
        };
        let diag = cptp_diagnostics(r);
        rows.push(ObservableRow {
            s,
            p_minus: gp.probability,
            ground_multiplicity: gp.multiplicity,
            fidelity,
            jb_overlaps: jb_overlaps(spec, r)?,
            trace_error: diag.trace_error,
            min_eig: diag.min_eig,
        });
    }
    Ok(rows)
}

/// Labels whose overlap with the initial state is below `tol`.
pub fn unpopulated_blocks(rows: &[ObservableRow], tol: f64) -> Vec<usize> {
    rows.first()
        .map(|r| {
            r.jb_overlaps
                .iter()
                .enumerate()
                .filter(|(_, &v)| v < tol)
                .map(|(k, _)| k)
                .collect()
        })
        .unwrap_or_default()
}

/// Largest overlap reached by any of `labels` along the trajectory.
pub fn max_leakage(rows: &[ObservableRow], labels: &[usize]) -> f64 {
    rows.iter()
        .flat_map(|r| labels.iter().map(move |&k| r.jb_overlaps[k]))
        .fold(0.0, f64::max)
}
