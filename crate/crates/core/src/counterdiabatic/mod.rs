//! Counterdiabatic generators: the exact Jordan-basis construction and the
//! variational least-squares engine.

pub mod ansatz;
pub mod derivative;
pub mod exact;
pub mod provider;
pub mod variational;

pub use ansatz::{ansatz_supermatrix, named_terms, AnsatzTerm, TermKind};
pub use derivative::{lindbladian_derivative, Derivative, DerivativeOptions};
pub use exact::{closed_system_gauge_qubit, exact_cd, jordan_matrix, residual_eq19, ExactCd};
pub use provider::{CdMode, CdPoint, CdProvider};
pub use variational::{assemble_lsq, combine, kms_violation, solve_variational, LsqProblem, VariationalSolution};
