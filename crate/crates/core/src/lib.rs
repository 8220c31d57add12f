//! Construction and stability analysis of spherical isotropic steady states of
//! the gravitational Vlasov-Poisson system.
//!
//! The crate builds self-consistent equilibria `f0 = F(E)` (polytropes, King
//! model, tabulated laws), evaluates the conserved functionals of the flow
//! (Hamiltonian, Casimirs, Lebesgue norms), implements microscopic-energy
//! rearrangements and the reduced variational functional, the linearized
//! free energy with the Antonov coercivity bound, and a particle code that
//! demonstrates orbital stability empirically.
//!
//! Unit convention: the Poisson equation is `Δφ = ρ` with
//! `φ = -(1/(4π|x|)) * ρ`; all masses are dimensionless. This differs from
//! the astrophysical `Δφ = 4πGρ` convention by constant factors.
//!
//! With the `parallel` feature (default) the hot loops run on rayon;
//! reductions are performed in fixed index order so results are bit-identical
//! for any worker count, and identical to the sequential fallback.

// Index loops read better in stencil/grid code.
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` deliberately catches NaN where `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod dynamics;
pub mod equilibrium;
pub mod exec;
pub mod functionals;
pub mod linearized;
pub mod radial;
pub mod rearrangement;
