//! Turns a manifest into core objects.

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;
use opencd_core::counterdiabatic::{named_terms, AnsatzTerm, CdMode, DerivativeOptions};
use opencd_core::evolution::IntegratorConfig;
use opencd_core::generator::{Evaluation, GeneratorSource};
use opencd_core::models::{AnnealingScenario, BathSpec, InitialState, Model, PSpinModel, QubitModel};
use opencd_core::operator::C64;

use crate::config::{
    CdConfig, CdKind, EvaluationChoice, ExplicitTerm, InitialChoice, ModelConfig, RunConfig, TermKindConfig,
};

pub fn model(cfg: &ModelConfig) -> Result<Model> {
    Ok(match *cfg {
        ModelConfig::Qubit { omega_x, omega_z } => Model::Qubit(QubitModel::new(omega_x, omega_z)?),
        ModelConfig::Pspin { n, p, gamma, j } => Model::PSpin(PSpinModel::new(n, p, gamma, j)?),
    })
}

/// `eta_g2 = 0` (or no `[bath]`) gives the closed system.
pub fn scenario(cfg: &RunConfig, eta_g2: f64) -> Result<AnnealingScenario> {
    let bath = match &cfg.bath {
        Some(b) if eta_g2 > 0.0 => Some(BathSpec::with_temperature(
            eta_g2,
            b.temperature_rad_per_ns(),
            b.omega_c,
            b.lamb_shift,
        )?),
        _ => None,
    };
    Ok(AnnealingScenario::with_default_coupling(model(&cfg.model)?, bath)?)
}

pub fn derivative_options(cfg: &RunConfig) -> DerivativeOptions {
    DerivativeOptions {
        h: cfg.generator.derivative_step,
        richardson: cfg.generator.richardson,
        ..DerivativeOptions::default()
    }
}

pub fn generator_source(cfg: &RunConfig, sc: AnnealingScenario) -> Result<GeneratorSource> {
    let evaluation = match cfg.generator.evaluation {
        EvaluationChoice::Auto => match Evaluation::default_for(sc.dim()) {
            Evaluation::Grid { .. } => Evaluation::Grid {
                points: cfg.generator.grid_points,
            },
            e => e,
        },
        EvaluationChoice::Exact => Evaluation::Exact,
        EvaluationChoice::Grid => Evaluation::Grid {
            points: cfg.generator.grid_points,
        },
    };
    Ok(GeneratorSource::new(sc, evaluation, derivative_options(cfg))?)
}

fn explicit_matrix(t: &ExplicitTerm, d: usize) -> Result<DMatrix<C64>> {
    let rows_ok = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
    if !rows_ok(&t.re) || !(t.im.is_empty() || rows_ok(&t.im)) {
        bail!("explicit term '{}' must be {d}×{d}", t.label);
    }
    Ok(DMatrix::from_fn(d, d, |i, j| {
        C64::new(t.re[i][j], t.im.get(i).map_or(0.0, |r| r[j]))
    }))
}

pub fn cd_mode(cd: &CdConfig, sc: &AnnealingScenario) -> Result<CdMode> {
    Ok(match cd.mode {
        CdKind::None => CdMode::None,
        CdKind::Exact => CdMode::Exact,
        CdKind::Variational => {
            let ops = sc.model().spin_ops();
            let mut terms = Vec::new();
            for name in &cd.terms {
                terms.extend(named_terms(name, &ops, sc.basis()).with_context(|| format!("cd '{}'", cd.label))?);
            }
            for t in &cd.explicit {
                let m = explicit_matrix(t, sc.dim())?;
                terms.push(match t.kind {
                    TermKindConfig::Unitary => AnsatzTerm::unitary(t.label.clone(), m),
                    TermKindConfig::Dissipative => AnsatzTerm::dissipative(t.label.clone(), m),
                });
            }
            CdMode::Variational(terms)
        }
    })
}

pub fn initial_state(cfg: &RunConfig, sc: &AnnealingScenario) -> InitialState {
    match cfg.initial_state {
        InitialChoice::Default => sc.default_initial_state(),
        InitialChoice::Ground => InitialState::Ground,
        InitialChoice::Thermal if sc.bath().is_none() => {
            log::warn!("closed system has no bath temperature; starting from the ground state");
            InitialState::Ground
        }
        InitialChoice::Thermal => InitialState::Thermal,
    }
}

pub fn integrator(cfg: &RunConfig) -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: cfg.integrator.rel_tol,
        abs_tol: cfg.integrator.abs_tol,
        max_step: cfg.integrator.max_step,
        samples: cfg.integrator.samples,
        ..IntegratorConfig::default()
    }
}
