//! Conserved quantities and inequality checks: energies, Casimirs,
//! Lebesgue norms, the interpolation inequality and the stability
//! distances.

mod casimir;
mod distance;
mod energy;
mod gridded;
mod interp;
mod view;

pub use casimir::{casimir, lp_norm};
pub use distance::{estimate_shift, stability_distance, weighted_shift_distance};
pub use energy::{
    binning_grid, energy_report, potential_energy_of_density, spatial_density, EnergyReport,
};
pub use gridded::{GriddedF, PhaseGrid};
pub use interp::{
    density_bound_exponents, interpolation_check, potential_bound_exponents, BoxDistribution,
    InterpolationCheck, P_CRITICAL,
};
pub use view::DistributionView;

#[derive(Debug, thiserror::Error)]
pub enum FunctionalsError {
    #[error("unsupported norm exponent p = {0}")]
    UnsupportedNorm(f64),
    #[error("supercritical exponent: the field-energy bound needs p > 9/7")]
    SupercriticalExponent,
    #[error("undersampled: {0} particles where at least 100 are needed")]
    Undersampled(usize),
    #[error("casimir weight must vanish at zero, got C(0) = {0}")]
    CasimirAtZero(f64),
    #[error(transparent)]
    Radial(#[from] crate::radial::RadialError),
}
