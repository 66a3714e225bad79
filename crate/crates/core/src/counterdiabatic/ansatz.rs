use crate::error::{Error, Result};
use crate::models::hamiltonian::SpinOps;
use crate::operator::{dissipator_superop, re, unitary_superop, BasisHandle, ComplexMatrix, Superoperator};

#[derive(Debug, Clone, PartialEq)]
pub enum TermKind {
    /// `−i[A, •]` with a real, unconstrained coefficient.
    Unitary(ComplexMatrix),
    /// `Γ • Γ† − ½{Γ†Γ, •}` with a nonnegative coefficient.
    Dissipative(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzTerm {
    pub label: String,
    pub kind: TermKind,
}

impl AnsatzTerm {
    pub fn unitary(label: impl Into<String>, generator: ComplexMatrix) -> Self {
        Self {
            label: label.into(),
            kind: TermKind::Unitary(generator),
        }
    }

    pub fn dissipative(label: impl Into<String>, jump: ComplexMatrix) -> Self {
        Self {
            label: label.into(),
            kind: TermKind::Dissipative(jump),
        }
    }

    pub fn is_constrained(&self) -> bool {
        matches!(self.kind, TermKind::Dissipative(_))
    }
}

pub fn ansatz_supermatrix(term: &AnsatzTerm, basis: &BasisHandle) -> Result<Superoperator> {
    match &term.kind {
        TermKind::Unitary(a) => unitary_superop(a, basis),
        TermKind::Dissipative(g) => dissipator_superop(std::slice::from_ref(g), &[1.0], basis),
    }
}

/// Expands a named term family.
///
/// * `sigma_y`: `2S_y` (the Pauli matrix for a qubit)
/// * `Sy`, `Sy3`: `S_y` and `S_y³`
/// * `SxSySz_cyclic`: `S_xS_yS_z + h.c.`
/// * `basis_dissipators`: one dissipative channel per traceless basis element
pub fn named_terms(name: &str, ops: &SpinOps, basis: &BasisHandle) -> Result<Vec<AnsatzTerm>> {
    let d = ops.sx.nrows();
    if basis.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: d,
        });
    }
    let terms = match name {
        "sigma_y" => vec![AnsatzTerm::unitary(name, &ops.sy * re(2.0))],
        "Sy" => vec![AnsatzTerm::unitary(name, ops.sy.clone())],
        "Sy3" => vec![AnsatzTerm::unitary(name, &ops.sy * &ops.sy * &ops.sy)],
        "SxSySz_cyclic" => {
            let p = &ops.sx * &ops.sy * &ops.sz;
            let h = &p + p.adjoint();
            vec![AnsatzTerm::unitary(name, h)]
        }
        "basis_dissipators" => basis.elements()[1..]
            .iter()
            .enumerate()
            .map(|(i, s)| AnsatzTerm::dissipative(format!("Sigma_{}", i + 1), s.clone()))
            .collect(),
        other => {
            return Err(Error::InvalidParameter(format!("unknown ansatz term family '{other}'")))
        }
    };
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::hamiltonian::{collective_spin_ops, pauli_y};
    use crate::operator::{build_basis, hermiticity_residual};

    #[test]
    fn sigma_y_term_is_pauli_commutator() {
        let basis = build_basis(2).unwrap().handle();
        let ops = collective_spin_ops(1).unwrap();
        let t = named_terms("sigma_y", &ops, &basis).unwrap();
        let m = ansatz_supermatrix(&t[0], &basis).unwrap();
        let y = unitary_superop(&(pauli_y() * re(0.7)), &basis).unwrap();
        assert!((&m.scale(0.7) - &y).norm() < 1e-15);
    }

    #[test]
    fn basis_dissipators_for_four_levels() {
        let basis = build_basis(4).unwrap().handle();
        let ops = collective_spin_ops(3).unwrap();
        let t = named_terms("basis_dissipators", &ops, &basis).unwrap();
        assert_eq!(t.len(), 15);
        for term in &t {
            assert!(term.is_constrained());
            let m = ansatz_supermatrix(term, &basis).unwrap();
            assert!(m.trace_row_residual() < 1e-14);
            // Hermitian jump: Σ • Σ − ½{Σ², •} kills the identity
            assert!(m.matrix().column(0).norm() < 1e-14);
        }
        let cyc = named_terms("SxSySz_cyclic", &ops, &basis).unwrap();
        if let TermKind::Unitary(h) = &cyc[0].kind {
            assert!(hermiticity_residual(h) < 1e-15);
        }
    }

    #[test]
    fn zero_generator_and_unknown_names() {
        let basis = build_basis(2).unwrap().handle();
        let zero = AnsatzTerm::unitary("zero", ComplexMatrix::zeros(2, 2));
        assert_eq!(ansatz_supermatrix(&zero, &basis).unwrap().norm(), 0.0);
        let ops = collective_spin_ops(1).unwrap();
        assert!(named_terms("Sz", &ops, &basis).is_err());
    }
}
