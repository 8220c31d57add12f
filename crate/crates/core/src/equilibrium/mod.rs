//! Self-consistent steady states `f0(x,v) = F(E)` and their construction.

mod build;
mod io;
mod law;
mod sample;
mod symmetry;

pub use build::{build_equilibrium, EquilibriumModel, PartialShot};
pub use io::{read_model_dir, write_model_dir};
pub use law::{polytrope_density_constant, AnsatzLaw, POLYTROPE_N_MAX};
pub use sample::sample_particles;
pub use symmetry::{symmetry_transform, SymmetryParams, TransformedModel};

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("central depth must be positive, got {0}")]
    BadCentralDepth(f64),
    #[error("non-compact support: depth never reaches zero within the grid")]
    NonCompactSupport(PartialShot),
    #[error("integrator step size underflow")]
    StepUnderflow,
    #[error(transparent)]
    Radial(#[from] crate::radial::RadialError),
    #[error("model io: {0}")]
    Io(String),
}
