pub mod integrator;
pub mod observables;
pub mod trajectory;

pub use integrator::{integrate, DenseSolution, IntegratorConfig, StepStats};
pub use observables::{
    cptp_diagnostics, ground_projector, ground_state_probability, thermal_state, uhlmann_fidelity,
    CptpDiagnostics, GroundPopulation,
};
pub use trajectory::{
    evolve, max_leakage, observables, spectrum_track, unpopulated_blocks, ObservableRow, Trajectory,
};
