use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::hamiltonian::QubitModel;
use crate::models::schedule::{schedule_dq, schedule_q};
use crate::operator::{re, Superoperator};
use crate::spectral::JordanSpectrum;

/// Relative eigenvalue gap below which a pair is left out of the exact CD sum.
pub const PAIR_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ExactCd {
    pub generator: Superoperator,
    /// Ordered pairs `(α, β)`, `α ≠ β`, dropped as degenerate.
    pub skipped_pairs: usize,
}

/// `Σ_{α≠β} ⟨⟨E_β|𝕃'|D_α⟩⟩ / (λ_α − λ_β) |D_β⟩⟩⟨⟨E_α|`.
pub fn exact_cd(spec: &JordanSpectrum, dl: &Superoperator) -> Result<ExactCd> {
    if !spec.one_d() {
        return Err(Error::Unsupported(
            "exact CD requires a one-dimensional Jordan form".into(),
        ));
    }
    let n = spec.len();
    if dl.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: dl.dim(),
        });
    }
    let lam = spec.eigenvalues();
    let scale = lam.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let tol = PAIR_DEGENERACY_TOL * scale;
    let jordan = spec.left() * dl.matrix() * spec.right();
    let mut skipped = 0;
    let mut k = DMatrix::zeros(n, n);
    for beta in 0..n {
        for alpha in 0..n {
            if alpha == beta {
                continue;
            }
            let gap = lam[alpha] - lam[beta];
            if gap.norm() <= tol {
                skipped += 1;
                continue;
            }
            k[(beta, alpha)] = jordan[(beta, alpha)] / gap;
        }
    }
    if skipped == n * (n - 1) && n > 1 {
        warn!("every eigenvalue pair is degenerate; exact CD is empty");
    }
    let mut a = spec.right() * k * spec.left();
    // the trace functional is a left zero mode annihilating 𝕃', so row 0 vanishes
    // identically; clear the roundoff that the eigenvector conditioning leaves there
    a.row_mut(0).fill(re(0.0));
    Ok(ExactCd {
        generator: Superoperator::new(spec.basis().clone(), a)?,
        skipped_pairs: skipped,
    })
}

/// `‖[𝕃' − [𝔸, 𝕃_0], 𝕃_0]‖` in the Frobenius norm.
pub fn residual_eq19(a: &Superoperator, l0: &Superoperator, dl: &Superoperator) -> f64 {
    (dl - &a.commutator(l0)).commutator(l0).norm()
}

/// `−q'(s) / (1 − 2q + 2q²)`, the coefficient of `σ_y` in the closed-form two-level gauge potential.
pub fn closed_system_gauge_qubit(s: f64, model: &QubitModel) -> Result<f64> {
    if (model.omega_x - model.omega_z).abs() > 1e-12 * model.omega_x.max(model.omega_z) {
        return Err(Error::InvalidParameter(
            "closed-form gauge potential assumes omega_x = omega_z".into(),
        ));
    }
    let q = schedule_q(s)?;
    let dq = schedule_dq(s)?;
    Ok(-dq / (1.0 - 2.0 * q + 2.0 * q * q))
}

/// Matrix elements `⟨⟨E_β|op|D_α⟩⟩` in the Jordan basis.
pub fn jordan_matrix(spec: &JordanSpectrum, op: &Superoperator) -> DMatrix<crate::operator::C64> {
    spec.left() * op.matrix() * spec.right()
}

#[cfg(test)]
pub(crate) fn zero_like(spec: &JordanSpectrum) -> Superoperator {
    let n = spec.len();
    Superoperator::new(spec.basis().clone(), DMatrix::from_element(n, n, re(0.0)))
        .expect("square by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterdiabatic::derivative::{lindbladian_derivative, DerivativeOptions};
    use crate::models::hamiltonian::pauli_y;
    use crate::models::{AnnealingScenario, BathSpec, Model};
    use crate::operator::unitary_superop;
    use crate::spectral::decompose;
    use std::f64::consts::PI;

    fn qubit(eta: Option<f64>) -> AnnealingScenario {
        let bath = eta.map(|e| BathSpec::with_temperature(e, 2.23, 8.0 * PI, true).unwrap());
        AnnealingScenario::with_default_coupling(Model::Qubit(QubitModel::new(1.0, 1.0).unwrap()), bath)
            .unwrap()
    }

    fn pieces(sc: &AnnealingScenario, s: f64) -> (Superoperator, Superoperator, JordanSpectrum) {
        let l0 = sc.lindbladian(s).unwrap();
        let dl = lindbladian_derivative(|x| sc.lindbladian(x), s, DerivativeOptions::default())
            .unwrap()
            .value;
        let spec = decompose(&l0).unwrap();
        (l0, dl, spec)
    }

    #[test]
    fn gauge_formula_values() {
        let m = QubitModel::new(1.0, 1.0).unwrap();
        assert_eq!(closed_system_gauge_qubit(0.0, &m).unwrap(), 0.0);
        assert!((closed_system_gauge_qubit(0.5, &m).unwrap() + 3.75).abs() < 1e-14);
        assert_eq!(closed_system_gauge_qubit(1.0, &m).unwrap(), 0.0);
        assert!(closed_system_gauge_qubit(0.5, &QubitModel::new(1.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn unitary_exact_cd_is_sigma_y_rotation() {
        let sc = qubit(None);
        let model = QubitModel::new(1.0, 1.0).unwrap();
        for s in [0.2, 0.5, 0.7] {
            let (l0, dl, spec) = pieces(&sc, s);
            let a = exact_cd(&spec, &dl).unwrap();
            assert!(residual_eq19(&a.generator, &l0, &dl) < 1e-8);
            // same map as −i[y σ_y, •] restricted to the Bloch block
            let unit = unitary_superop(&pauli_y(), sc.basis()).unwrap();
            let y = a.generator.matrix()[(3, 1)].re / unit.matrix()[(3, 1)].re;
            let diff = &a.generator - &unit.scale(y);
            assert!(diff.norm() < 1e-7, "s = {s}: {}", diff.norm());
            let eq20 = closed_system_gauge_qubit(s, &model).unwrap();
            assert!((y.abs() - eq20.abs() / 2.0).abs() < 1e-7, "s = {s}: {y} vs {eq20}");
        }
    }

    #[test]
    fn open_exact_cd_satisfies_eq19() {
        for eta in [1e-4, 1e-2] {
            let sc = qubit(Some(eta));
            for s in [0.1, 0.5, 0.9] {
                let (l0, dl, spec) = pieces(&sc, s);
                let a = exact_cd(&spec, &dl).unwrap();
                assert_eq!(a.skipped_pairs, 0);
                let r = residual_eq19(&a.generator, &l0, &dl);
                assert!(r < 1e-8 * dl.norm().max(1.0), "{eta} {s}: {r}");
                assert!(residual_eq19(&zero_like(&spec), &l0, &dl) > 1e-6);
            }
        }
    }

    #[test]
    fn zero_derivative_gives_zero_cd() {
        let sc = qubit(Some(1e-4));
        let (_, _, spec) = pieces(&sc, 0.5);
        let a = exact_cd(&spec, &zero_like(&spec)).unwrap();
        assert!(a.generator.norm() < 1e-14);
    }

    #[test]
    fn sign_flip_breaks_eq19() {
        let sc = qubit(Some(1e-4));
        let (l0, dl, spec) = pieces(&sc, 0.5);
        let a = exact_cd(&spec, &dl).unwrap();
        let flipped = a.generator.scale(-1.0);
        assert!(residual_eq19(&flipped, &l0, &dl) > 1e-3);
    }

    #[test]
    fn jordan_structure_of_cd_correction() {
        let sc = qubit(Some(1e-2));
        let (l0, dl, spec) = pieces(&sc, 0.4);
        let a = exact_cd(&spec, &dl).unwrap();
        let with = jordan_matrix(&spec, &(&dl - &a.generator.commutator(&l0)));
        let without = jordan_matrix(&spec, &dl);
        for i in 0..4 {
            assert!((with[(i, i)] - without[(i, i)]).norm() < 1e-10);
            for j in 0..4 {
                if i != j {
                    assert!(with[(i, j)].norm() < 1e-8);
                }
            }
        }
    }
}
