//! Weak-coupling adiabatic master equation in the instantaneous eigenbasis.

use std::sync::atomic::{AtomicBool, Ordering};

use log::warn;

use crate::eig::hermitian_eigen;
use crate::error::{Error, Result};
use crate::models::bath::BathSpec;
use crate::operator::{
    check_square, dissipator_superop, hermiticity_residual, re, unitary_superop, BasisHandle,
    ComplexMatrix, Superoperator, HERMITICITY_TOL,
};

/// Bohr frequencies closer than this are merged into one jump operator.
pub const BOHR_MERGE_TOL: f64 = 1e-9;
/// Distinct bins closer than this are reported as near-degenerate.
pub const BOHR_WARN_TOL: f64 = 1e-6;

static NEAR_DEGENERATE_SEEN: AtomicBool = AtomicBool::new(false);

/// One Bohr-frequency channel: `Γ_ω` lowers the system energy by `ω`.
#[derive(Debug, Clone)]
pub struct BohrChannel {
    pub omega: f64,
    pub jump: ComplexMatrix,
    pub rate: f64,
    pub lamb: f64,
}

#[derive(Debug, Clone)]
pub struct AmeParts {
    pub energies: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    pub channels: Vec<BohrChannel>,
    pub lamb_shift: ComplexMatrix,
    /// Some pair of distinct bins lies within `BOHR_WARN_TOL`.
    pub near_degenerate: bool,
}

/// Groups `|a⟩⟨a|U|b⟩⟨b|` by `ω = ε_b − ε_a` and attaches rates and Lamb shifts.
pub fn ame_parts(h: &ComplexMatrix, coupling: &ComplexMatrix, bath: &BathSpec) -> Result<AmeParts> {
    let d = check_square(h)?;
    if coupling.shape() != h.shape() {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: coupling.nrows(),
        });
    }
    if hermiticity_residual(coupling) > HERMITICITY_TOL {
        return Err(Error::InvalidGenerator("coupling operator is not Hermitian".into()));
    }
    let (energies, vecs) = hermitian_eigen(h);
    let u_eig = vecs.adjoint() * coupling * &vecs;

    let mut pairs: Vec<(f64, usize, usize)> = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .map(|(a, b)| (energies[b] - energies[a], a, b))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut bins: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for p in pairs {
        match bins.last_mut() {
            Some(bin) if p.0 - bin.last().unwrap().0 < BOHR_MERGE_TOL => bin.push(p),
            _ => bins.push(vec![p]),
        }
    }

    let centers: Vec<f64> = bins
        .iter()
        .map(|b| b.iter().map(|p| p.0).sum::<f64>() / b.len() as f64)
        .collect();
    let near_degenerate = centers.windows(2).any(|w| w[1] - w[0] < BOHR_WARN_TOL);

    let mut channels = Vec::new();
    let mut lamb_shift = ComplexMatrix::zeros(d, d);
    for (bin, &omega) in bins.iter().zip(&centers) {
        let mut jump_eig = ComplexMatrix::zeros(d, d);
        for &(_, a, b) in bin {
            jump_eig[(a, b)] = u_eig[(a, b)];
        }
        if jump_eig.norm() == 0.0 {
            continue;
        }
        let jump = &vecs * jump_eig * vecs.adjoint();
        let rate = bath.gamma(omega);
        let lamb = if bath.include_lamb_shift {
            bath.lamb_shift_zeta(omega)?
        } else {
            0.0
        };
        if lamb != 0.0 {
            lamb_shift += jump.adjoint() * &jump * re(lamb);
        }
        channels.push(BohrChannel {
            omega,
            jump,
            rate,
            lamb,
        });
    }
    lamb_shift = (&lamb_shift + lamb_shift.adjoint()) * re(0.5);

    Ok(AmeParts {
        energies,
        eigenvectors: vecs,
        channels,
        lamb_shift,
        near_degenerate,
    })
}

/// `−i[H + H_LS, •] + Σ_ω γ(ω) D[Γ_ω]`; without coupling this is the bare unitary generator.
pub fn build_ame_lindbladian(
    h: &ComplexMatrix,
    coupling: &ComplexMatrix,
    bath: &BathSpec,
    basis: &BasisHandle,
) -> Result<Superoperator> {
    if bath.eta_g2 == 0.0 {
        return unitary_superop(h, basis);
    }
    let parts = ame_parts(h, coupling, bath)?;
    if parts.near_degenerate && !NEAR_DEGENERATE_SEEN.swap(true, Ordering::Relaxed) {
        warn!("near-degenerate Bohr frequencies; bins merged at {BOHR_MERGE_TOL:e}");
    }
    let unitary = unitary_superop(&(h + &parts.lamb_shift), basis)?;
    let (ops, rates): (Vec<_>, Vec<_>) = parts
        .channels
        .into_iter()
        .map(|c| (c.jump, c.rate))
        .unzip();
    let diss = dissipator_superop(&ops, &rates, basis)?;
    Ok(&unitary + &diss)
}
