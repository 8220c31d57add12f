//! Nonlinear particle evolution with two mean-field solvers, diagnostics
//! and the orbital-stability experiment.

mod ensemble;
mod experiment;
mod fields;
mod leapfrog;

pub use ensemble::ParticleEnsemble;
pub use experiment::{
    apply_perturbation, stability_experiment, ExperimentConfig, HypothesisReport,
    PerturbationKind, StabilityOutcome,
};
pub use fields::{
    field_direct, field_direct_seq, field_radial, potential_energy_direct,
    potential_energy_radial, DIRECT_SUM_BUDGET,
};
pub use leapfrog::{
    evolve, step_leapfrog, write_diagnostics_csv, DiagnosticsConfig, DiagnosticsRecord,
    EvolveOutcome, Solver,
};

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("position/velocity/weight arrays differ in length")]
    LengthMismatch,
    #[error("non-finite particle state at t = {time}")]
    NonFiniteState { time: f64 },
    #[error("{n} particles exceed the direct-sum budget of {budget}; use the radial solver")]
    DirectSumBudget { n: usize, budget: usize },
    #[error("softening must be positive, got {0}")]
    BadSoftening(f64),
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("diagnostics: {0}")]
    Diagnostics(String),
    #[error("snapshot io: {0}")]
    Io(std::io::Error),
}
