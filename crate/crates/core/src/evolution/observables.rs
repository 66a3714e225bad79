//! State observables: ground-state population, Uhlmann fidelity, Gibbs states
//! and positivity diagnostics.

use nalgebra::DVector;

use crate::eig::hermitian_eigen;
use crate::error::{Error, Result};
use crate::operator::{check_square, devectorize, hermiticity_residual, re, CoherenceVector, ComplexMatrix};

/// Relative tolerance for treating Hamiltonian levels as degenerate.
pub const LEVEL_DEGENERACY_TOL: f64 = 1e-9;

/// Projector onto the (possibly degenerate) ground space, and its rank.
pub fn ground_projector(h: &ComplexMatrix) -> (ComplexMatrix, usize) {
    let (vals, vecs) = hermitian_eigen(h);
    let tol = LEVEL_DEGENERACY_TOL * vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mult = vals.iter().take_while(|&&v| v - vals[0] <= tol).count();
    let g = vecs.columns(0, mult);
    (&g * g.adjoint(), mult)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPopulation {
    pub probability: f64,
    pub multiplicity: usize,
}

/// `Tr[Π_0 ρ]` with `Π_0` the ground-space projector of `h`.
pub fn ground_state_probability(r: &CoherenceVector, h: &ComplexMatrix) -> Result<GroundPopulation> {
    let d = check_square(h)?;
    if d != r.basis().dim() {
        return Err(Error::DimensionMismatch {
            expected: r.basis().dim(),
            found: d,
        });
    }
    let rho = devectorize(r);
    let (p, multiplicity) = ground_projector(h);
    Ok(GroundPopulation {
        probability: (p * rho).trace().re,
        multiplicity,
    })
}

fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let root = DVector::from_iterator(vals.len(), vals.iter().map(|&v| re(v.max(0.0).sqrt())));
    &vecs * ComplexMatrix::from_diagonal(&root) * vecs.adjoint()
}

fn check_state(rho: &ComplexMatrix) -> Result<()> {
    check_square(rho)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-6 {
        return Err(Error::InvalidState(format!("trace {tr} differs from one")));
    }
    if hermiticity_residual(rho) > 1e-6 {
        return Err(Error::InvalidState("density matrix is not Hermitian".into()));
    }
    let min = hermitian_eigen(rho).0[0];
    if min < -1e-8 {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `(Tr√(√ρ σ √ρ))²`, clipped to `[0, 1]`.
pub fn uhlmann_fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    check_state(rho)?;
    check_state(sigma)?;
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: sigma.nrows(),
        });
    }
    let sr = psd_sqrt(rho);
    let inner = &sr * sigma * &sr;
    let (vals, _) = hermitian_eigen(&inner);
    let tr: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `e^{−βH}/Tr e^{−βH}`, shifted by the ground energy before exponentiation.
pub fn thermal_state(h: &ComplexMatrix, beta: f64) -> Result<ComplexMatrix> {
    check_square(h)?;
    if !(beta > 0.0) {
        return Err(Error::Domain {
            name: "beta",
            value: beta,
            domain: "(0, ∞)",
        });
    }
    let (vals, vecs) = hermitian_eigen(h);
    let w: Vec<f64> = vals.iter().map(|&e| (-beta * (e - vals[0])).exp()).collect();
    let z: f64 = w.iter().sum();
    let diag = DVector::from_iterator(w.len(), w.iter().map(|&x| re(x / z)));
    Ok(&vecs * ComplexMatrix::from_diagonal(&diag) * vecs.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpDiagnostics {
    pub trace_error: f64,
    pub min_eig: f64,
}

pub fn cptp_diagnostics(r: &CoherenceVector) -> CptpDiagnostics {
    let trace_error = (r.trace() - re(1.0)).norm();
    let rho = devectorize(r);
    let herm = (&rho + rho.adjoint()) * re(0.5);
    CptpDiagnostics {
        trace_error,
        min_eig: hermitian_eigen(&herm).0[0],
    }
}
