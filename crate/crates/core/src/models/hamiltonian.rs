//! Annealing Hamiltonians: the driven qubit and the ferromagnetic p-spin model
//! in its maximal-spin symmetric subspace.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::models::schedule::{schedule_dq, schedule_q};
use crate::operator::{re, ComplexMatrix, C64};

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[re(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), re(0.0)],
    )
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
}

/// `H(s) = −[1−q(s)](ω_x/2)σ_x − q(s)(ω_z/2)σ_z`, frequencies in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitModel {
    pub omega_x: f64,
    pub omega_z: f64,
}

impl QubitModel {
    pub fn new(omega_x: f64, omega_z: f64) -> Result<Self> {
        for (name, v) in [("omega_x", omega_x), ("omega_z", omega_z)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(0, ∞)",
                });
            }
        }
        Ok(Self { omega_x, omega_z })
    }

    pub fn hamiltonian(&self, s: f64) -> Result<ComplexMatrix> {
        let q = schedule_q(s)?;
        Ok(pauli_x() * re(-(1.0 - q) * self.omega_x / 2.0) + pauli_z() * re(-q * self.omega_z / 2.0))
    }

    /// Analytic `dH/ds`.
    pub fn hamiltonian_ds(&self, s: f64) -> Result<ComplexMatrix> {
        let dq = schedule_dq(s)?;
        Ok(pauli_x() * re(dq * self.omega_x / 2.0) + pauli_z() * re(-dq * self.omega_z / 2.0))
    }

    /// Instantaneous gap `√(((1−q)ω_x)² + (qω_z)²)`.
    pub fn gap(&self, s: f64) -> Result<f64> {
        let q = schedule_q(s)?;
        Ok(((1.0 - q) * self.omega_x).hypot(q * self.omega_z))
    }
}

/// Spin-`n/2` angular momentum matrices in the `|m = S⟩, …, |m = −S⟩` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOps {
    pub sx: ComplexMatrix,
    pub sy: ComplexMatrix,
    pub sz: ComplexMatrix,
}

pub fn collective_spin_ops(n: usize) -> Result<SpinOps> {
    if n < 1 {
        return Err(Error::InvalidParameter("spin count n must be at least 1".into()));
    }
    let dim = n + 1;
    let spin = n as f64 / 2.0;
    let mut raise = ComplexMatrix::zeros(dim, dim);
    for k in 1..dim {
        let m = spin - k as f64;
        raise[(k - 1, k)] = re((spin * (spin + 1.0) - m * (m + 1.0)).sqrt());
    }
    let lower = raise.adjoint();
    let sz = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        (0..dim).map(|k| re(spin - k as f64)),
    ));
    Ok(SpinOps {
        sx: (&raise + &lower) * re(0.5),
        sy: (&raise - &lower) * C64::new(0.0, -0.5),
        sz,
    })
}

/// Ferromagnetic p-spin model `−Γ(1−q)Σσˣ − (J/n^{p−1}) q (Σσᶻ)^p`, written as
/// `−2Γ(1−q)S_x − (Jq/n^{p−1})(2S_z)^p` on the `D = n+1` symmetric subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct PSpinModel {
    pub n: usize,
    pub p: u32,
    pub gamma: f64,
    pub j: f64,
    ops: SpinOps,
}

impl PSpinModel {
    pub fn new(n: usize, p: u32, gamma: f64, j: f64) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidParameter("interaction order p must be at least 1".into()));
        }
        for (name, v) in [("gamma", gamma), ("j", j)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(0, ∞)",
                });
            }
        }
        let ops = collective_spin_ops(n)?;
        Ok(Self { n, p, gamma, j, ops })
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn spin_ops(&self) -> &SpinOps {
        &self.ops
    }

    pub fn hamiltonian(&self, s: f64) -> Result<ComplexMatrix> {
        let q = schedule_q(s)?;
        let mz = &self.ops.sz * re(2.0);
        let zp = (1..self.p).fold(mz.clone(), |acc, _| acc * &mz);
        let norm = (self.n as f64).powi(self.p as i32 - 1);
        Ok(&self.ops.sx * re(-2.0 * self.gamma * (1.0 - q)) + zp * re(-self.j * q / norm))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Qubit(QubitModel),
    PSpin(PSpinModel),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Qubit(_) => 2,
            Model::PSpin(m) => m.dim(),
        }
    }

    pub fn hamiltonian(&self, s: f64) -> Result<ComplexMatrix> {
        match self {
            Model::Qubit(m) => m.hamiltonian(s),
            Model::PSpin(m) => m.hamiltonian(s),
        }
    }

    /// Collective spin operators of the model's Hilbert space (`σ/2` for a qubit).
    pub fn spin_ops(&self) -> SpinOps {
        match self {
            Model::Qubit(_) => collective_spin_ops(1).expect("n = 1 is valid"),
            Model::PSpin(m) => m.spin_ops().clone(),
        }
    }
}
