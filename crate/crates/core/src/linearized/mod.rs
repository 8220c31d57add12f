//! The linearized Vlasov-Poisson flow around a steady state: brackets,
//! dynamically accessible perturbations, the conserved free energy, the
//! Antonov coercivity bound, the reduced Hessian and the stationary
//! Schrödinger operator.

mod antonov;
mod bracket;
mod evolve;
mod field;
mod free_energy;
mod spectral;

pub use antonov::{antonov_check, parallel_pressure_identity, AntonovCheck};
pub use bracket::{bracket_with_e, check_support, dynamically_accessible, edge_weight};
pub use evolve::{evolve_linearized, evolve_linearized_debug, LinearizedTrace, LinearizedTraceDebug};
pub use field::{FieldGrid, Parity, PerturbationField};
pub use free_energy::{
    apply_m, constrained_coercivity_probe, free_energy, m_inner_product,
    solve_perturbation_field, translation_mode_free_energy, translation_mode_m_residual,
    PerturbationFieldSolve,
};
pub use spectral::{
    effective_potential, fprime_weighted_integral, projection_p, reduced_hessian,
    schrodinger_residual, EnergyFunction, SpatialPerturbation,
};

#[derive(Debug, thiserror::Error)]
pub enum LinearizedError {
    #[error("parity mismatch between declaration and values")]
    Parity,
    #[error("inaccessible support: field does not vanish where E ≥ E0")]
    InaccessibleSupport,
    #[error("constraint collinearity: degenerate Gram matrix")]
    ConstraintCollinearity,
    #[error("time step {dt} too large; suggested dt = {suggested}")]
    CflViolation { dt: f64, suggested: f64 },
    #[error("harmonic index {0} requires u(0) = 0")]
    OriginValue(u32),
    #[error(transparent)]
    Radial(#[from] crate::radial::RadialError),
}
