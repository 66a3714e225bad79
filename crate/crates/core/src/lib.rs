//! Counterdiabatic driving for open quantum systems in the coherence-vector
//! (superoperator) representation.

pub mod counterdiabatic;
pub mod eig;
pub mod error;
pub mod evolution;
pub mod generator;
pub mod models;
pub mod nnls;
pub mod operator;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
