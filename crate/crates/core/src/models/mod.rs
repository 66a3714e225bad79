//! Physical model builders.

pub mod ame;
pub mod bath;
pub mod hamiltonian;
pub mod scenario;
pub mod schedule;

pub use ame::{ame_parts, build_ame_lindbladian, AmeParts, BohrChannel};
pub use bath::{kelvin_to_angular_ghz, BathSpec, PvOptions};
pub use hamiltonian::{collective_spin_ops, pauli_x, pauli_y, pauli_z, Model, PSpinModel, QubitModel, SpinOps};
pub use scenario::{AnnealingScenario, InitialState};
pub use schedule::{schedule_dq, schedule_q};
