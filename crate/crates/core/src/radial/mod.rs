//! Shared radial numerics: grids, quadrature, monotone inversion and the
//! radial Poisson solver used by every other module.
//!
//! All types are immutable after construction and all operations are pure,
//! so values can be shared freely across threads.

mod grid;
mod moment;
mod monotone;
pub mod numdiff;
mod poisson;
pub mod quad;

pub use grid::{Extrapolation, RadialGrid, RadialProfile, DEFAULT_GRID_NODES, MIN_GRID_NODES};
pub use moment::{parallel_moment_of_derivative, velocity_moment};
pub use monotone::{Direction, MonotoneMap};
pub use poisson::{
    integrate_radial, poisson_residual, solve_dipole_field, solve_radial_field,
    solve_radial_poisson, PoissonSolution,
};

/// Relative tolerance target for quadrature of smooth integrands.
pub const TOL_QUAD: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum RadialError {
    #[error("non-finite profile")]
    NonFiniteProfile,
    #[error("negative density")]
    NegativeDensity,
    #[error("grid needs at least {MIN_GRID_NODES} nodes, got {0}")]
    GridTooSmall(usize),
    #[error("grid must start at r = 0, got {0}")]
    GridOrigin(f64),
    #[error("grid nodes must be strictly increasing and finite")]
    GridNotIncreasing,
    #[error("values are not monotone in the declared direction")]
    NotMonotone,
    #[error("profile has {values} values on a grid of {grid} nodes")]
    LengthMismatch { grid: usize, values: usize },
    #[error("unsupported velocity moment order k = {0}")]
    UnsupportedMoment(i32),
    #[error("csv: {0}")]
    Csv(String),
}
