use crate::error::{Error, Result};
use crate::evolution::observables::{ground_projector, thermal_state};
use crate::models::ame::build_ame_lindbladian;
use crate::models::bath::BathSpec;
use crate::models::hamiltonian::{pauli_z, Model};
use crate::operator::{
    build_basis, check_square, hermiticity_residual, unitary_superop, vectorize, BasisHandle,
    CoherenceVector, ComplexMatrix, Superoperator, HERMITICITY_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// Pure ground state of `H(0)`.
    Ground,
    /// Gibbs state of `H(0)` at the bath temperature.
    Thermal,
}

/// A model, its system–bath coupling operator and an optional bath.
#[derive(Debug, Clone)]
pub struct AnnealingScenario {
    model: Model,
    coupling: ComplexMatrix,
    bath: Option<BathSpec>,
    basis: BasisHandle,
}

impl AnnealingScenario {
    pub fn new(model: Model, coupling: ComplexMatrix, bath: Option<BathSpec>) -> Result<Self> {
        let d = check_square(&coupling)?;
        if d != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: d,
            });
        }
        if hermiticity_residual(&coupling) > HERMITICITY_TOL {
            return Err(Error::InvalidGenerator("coupling operator is not Hermitian".into()));
        }
        let basis = build_basis(d)?.handle();
        Ok(Self {
            model,
            coupling,
            bath,
            basis,
        })
    }

    /// Couples through `σ_z` for a qubit and the total magnetization `S_z` for the p-spin model.
    pub fn with_default_coupling(model: Model, bath: Option<BathSpec>) -> Result<Self> {
        let u = match &model {
            Model::Qubit(_) => pauli_z(),
            Model::PSpin(m) => m.spin_ops().sz.clone(),
        };
        Self::new(model, u, bath)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    pub fn bath(&self) -> Option<&BathSpec> {
        self.bath.as_ref()
    }

    pub fn basis(&self) -> &BasisHandle {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn hamiltonian(&self, s: f64) -> Result<ComplexMatrix> {
        self.model.hamiltonian(s)
    }

    /// The generator `𝕃_0(s)` in units of 1/ns.
    pub fn lindbladian(&self, s: f64) -> Result<Superoperator> {
        let h = self.hamiltonian(s)?;
        match &self.bath {
            Some(b) => build_ame_lindbladian(&h, &self.coupling, b, &self.basis),
            None => unitary_superop(&h, &self.basis),
        }
    }

    /// The state the dynamics should follow: Gibbs at the bath temperature, or the ground state when closed.
    pub fn adiabatic_state(&self, s: f64) -> Result<ComplexMatrix> {
        let h = self.hamiltonian(s)?;
        match &self.bath {
            Some(b) => thermal_state(&h, b.beta),
            None => Ok(ground_projector(&h).0),
        }
    }

    pub fn default_initial_state(&self) -> InitialState {
        match (&self.model, &self.bath) {
            (Model::PSpin(_), Some(_)) => InitialState::Thermal,
            _ => InitialState::Ground,
        }
    }

    pub fn initial_state(&self, init: InitialState) -> Result<CoherenceVector> {
        let h = self.hamiltonian(0.0)?;
        let rho = match init {
            InitialState::Ground => {
                let (p, mult) = ground_projector(&h);
                p * crate::operator::re(1.0 / mult as f64)
            }
            InitialState::Thermal => {
                let b = self.bath.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("thermal initial state needs a bath temperature".into())
                })?;
                thermal_state(&h, b.beta)?
            }
        };
        vectorize(&rho, &self.basis)
    }
}
