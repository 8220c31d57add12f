//! Microscopic-energy rearrangements, level profiles and the reduced
//! variational functional.
//!
//! The rearrangement datum of a distribution is its [`LevelProfile`]; a 6-D
//! field is never materialized. Rearranged states are represented through
//! their values on phase grids.

mod level;
mod rearrange;
mod reduced;
mod volume;

pub use level::{rearranged_l1_distance, LevelProfile, DEFAULT_LEVELS};
pub use rearrange::{
    monotonicity_chain, rearrange_by_energy, rearrangement_energy_lemma_check, ChainReport,
};
pub use reduced::{rearranged_from_levels, reduced_functional};
pub use volume::{energy_volume, uniform_ball_potential, EnergyVolumeMap};

pub(crate) use volume::energy_volume_at;

#[derive(Debug, thiserror::Error)]
pub enum RearrangeError {
    #[error("unbound energy shell has infinite volume (E = {0} ≥ 0)")]
    UnboundEnergyShell(f64),
    #[error("potential is not a bound state")]
    UnboundPotential,
    #[error("distribution is identically zero")]
    EmptyDistribution,
    #[error(transparent)]
    Radial(#[from] crate::radial::RadialError),
    #[error(transparent)]
    Functionals(#[from] crate::functionals::FunctionalsError),
}
