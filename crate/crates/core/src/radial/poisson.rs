//! The radial Poisson solver and radial integration.
//!
//! Convention: `Δφ = ρ`, so that `φ'(r) = r^{-2} ∫_0^r s² ρ(s) ds` and a
//! body of mass `M` has the exterior potential `φ(r) = -M/(4πr)`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::grid::{Extrapolation, RadialProfile};
use super::quad::cell_rule;
use super::RadialError;

/// `4π ∫_0^{r_max} r² weight(r) p(r) dr`, the integral of a radial function
/// over three-dimensional space, by composite Gauss-Legendre quadrature.
pub fn integrate_radial(p: &RadialProfile, weight: impl Fn(f64) -> f64) -> Result<f64, RadialError> {
    if !p.values().iter().all(|v| v.is_finite()) {
        return Err(RadialError::NonFiniteProfile);
    }
    let rule = cell_rule();
    let nodes = p.grid().nodes();
    let mut acc = 0.0;
    for k in 0..nodes.len() - 1 {
        acc += rule.integrate(nodes[k], nodes[k + 1], |r| r * r * weight(r) * p.eval(r));
    }
    Ok(4.0 * PI * acc)
}

/// Output of a radial Poisson solve.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub phi: RadialProfile,
    pub dphi: RadialProfile,
    /// Total mass `4π ∫ r² ρ dr`.
    pub mass: f64,
}

/// Solves `Δφ = ρ` for a nonnegative compactly supported density.
///
/// `dphi(r) = r^{-2} ∫_0^r s²ρ ds` is nonnegative, `phi` is increasing and
/// nonpositive and matches the exterior solution `-M/(4πr)` at the grid end.
pub fn solve_radial_poisson(rho: &RadialProfile) -> Result<PoissonSolution, RadialError> {
    if rho.values().iter().any(|&v| v < 0.0) {
        return Err(RadialError::NegativeDensity);
    }
    solve_radial_field(rho)
}

/// Same computation as [`solve_radial_poisson`] without the sign restriction;
/// used for signed perturbation densities, where `phi` is simply the linear
/// solve and carries no monotonicity guarantees.
pub fn solve_radial_field(rho: &RadialProfile) -> Result<PoissonSolution, RadialError> {
    if !rho.values().iter().all(|v| v.is_finite()) {
        return Err(RadialError::NonFiniteProfile);
    }
    let rule = cell_rule();
    let grid = rho.grid_arc();
    let nodes = grid.nodes();
    let n = nodes.len();

    // Cumulative I(r_k) = ∫_0^{r_k} s² ρ ds.
    let mut shell = vec![0.0; n];
    for k in 1..n {
        shell[k] = rule.integrate(nodes[k - 1], nodes[k], |s| s * s * rho.eval(s));
    }
    let mut cum = vec![0.0; n];
    for k in 1..n {
        cum[k] = cum[k - 1] + shell[k];
    }
    let mass = 4.0 * PI * cum[n - 1];

    let mut dphi_vals = vec![0.0; n];
    for k in 1..n {
        dphi_vals[k] = cum[k] / (nodes[k] * nodes[k]);
    }
    let dphi = RadialProfile::new(
        Arc::clone(&grid),
        dphi_vals,
        Extrapolation::CoefOverR2(mass / (4.0 * PI)),
    )?;

    // phi(r_max) = -M/(4π r_max); integrate dphi inward.
    let mut phi_vals = vec![0.0; n];
    phi_vals[n - 1] = -mass / (4.0 * PI * grid.r_max());
    for k in (0..n - 1).rev() {
        let seg = rule.integrate(nodes[k], nodes[k + 1], |s| dphi.eval(s));
        phi_vals[k] = phi_vals[k + 1] - seg;
    }
    let phi = RadialProfile::new(grid, phi_vals, Extrapolation::CoefOverR(-mass / (4.0 * PI)))?;

    Ok(PoissonSolution { phi, dphi, mass })
}

/// Discrete residual `max_k |(1/r²)(r²φ')' - ρ|` over interior nodes,
/// evaluated in the origin-safe form `φ'' + 2φ'/r - ρ` with fourth-order
/// finite differences of the nodal field values.
pub fn poisson_residual(sol: &PoissonSolution, rho: &RadialProfile) -> f64 {
    let nodes = sol.dphi.grid().nodes();
    let d = sol.dphi.values();
    let dd = super::numdiff::derivative_on_grid(nodes, d);
    let mut worst: f64 = 0.0;
    for k in 1..nodes.len() - 1 {
        let res = dd[k] + 2.0 * d[k] / nodes[k] - rho.values()[k];
        worst = worst.max(res.abs());
    }
    worst
}

/// Solves the `ℓ = 1` radial Poisson equation `u'' + 2u'/r - 2u/r² = g`
/// with regularity at the origin and decay at infinity:
/// `u(r) = -(1/3)[ r^{-2} ∫_0^r s³ g ds + r ∫_r^∞ g ds ]`.
pub fn solve_dipole_field(g: &RadialProfile) -> Result<RadialProfile, RadialError> {
    let rule = cell_rule();
    let grid = g.grid_arc();
    let nodes = grid.nodes();
    let n = nodes.len();

    let mut inner = vec![0.0; n]; // ∫_0^{r_k} s³ g ds
    for k in 1..n {
        inner[k] = inner[k - 1] + rule.integrate(nodes[k - 1], nodes[k], |s| s * s * s * g.eval(s));
    }
    let mut outer = vec![0.0; n]; // ∫_{r_k}^{r_max} g ds (density compact: nothing beyond)
    for k in (0..n - 1).rev() {
        outer[k] = outer[k + 1] + rule.integrate(nodes[k], nodes[k + 1], |s| g.eval(s));
    }
    let mut u = vec![0.0; n];
    for k in 0..n {
        let r = nodes[k];
        let bulk = if r > 0.0 { inner[k] / (r * r) } else { 0.0 };
        u[k] = -(bulk + r * outer[k]) / 3.0;
    }
    // Exterior: u ~ -(1/3) I₃ / r², a dipole tail.
    RadialProfile::new(grid, u, Extrapolation::CoefOverR2(-inner[n - 1] / 3.0))
}
