//! The reduced variational functional
//! `J_{f*}(φ) = H(f^{*φ}) + ½‖∇φ - ∇φ_{f^{*φ}}‖²`, a functional of the
//! potential alone once the level profile of `f` is fixed.

use std::sync::Arc;

use super::level::LevelProfile;
use super::volume::EnergyVolumeMap;
use super::RearrangeError;
use crate::functionals::{potential_energy_of_density, spatial_density, DistributionView, GriddedF, PhaseGrid};
use crate::radial::{integrate_radial, solve_radial_field, Extrapolation, RadialGrid, RadialProfile};

/// Builds `f^{*φ} = λ_f(μ_φ(E_φ))` on a phase grid adapted to `φ`.
pub fn rearranged_from_levels(
    levels: &LevelProfile,
    phi: &RadialProfile,
) -> Result<GriddedF, RearrangeError> {
    let phi_c = phi.eval(0.0);
    if phi_c >= 0.0 {
        return Err(RearrangeError::UnboundPotential);
    }
    // Find an energy ceiling whose ball volume covers the support of the
    // levels.
    let target = 1.05 * levels.support_volume();
    let mut e_lo = phi_c;
    let mut e_hi = -1e-12 * phi_c.abs();
    for _ in 0..60 {
        let mid = 0.5 * (e_lo + e_hi);
        let v = super::volume::energy_volume_at(phi, mid)?;
        if v < target {
            e_lo = mid;
        } else {
            e_hi = mid;
        }
    }
    let ceiling = e_hi;
    let map = EnergyVolumeMap::build(phi, ceiling, 256)?;

    let grid = PhaseGrid {
        n_r: 96,
        n_w: 96,
        // The rearranged field depends on (r, w) only.
        n_c: 1,
        r_max: phi.grid().r_max(),
        w_max: (2.0 * (ceiling - phi_c)).sqrt(),
    };
    Ok(GriddedF::from_fn(grid, |r, w, _| {
        let e = 0.5 * w * w + phi.eval(r);
        if e >= ceiling {
            return 0.0;
        }
        levels.value_at_volume(map.volume_at(e))
    }))
}

/// Evaluates `J` at a potential given by its profile and radial derivative.
pub fn reduced_functional(
    levels: &LevelProfile,
    phi: &RadialProfile,
    dphi: &RadialProfile,
) -> Result<f64, RearrangeError> {
    let fhat = rearranged_from_levels(levels, phi)?;
    let radial = Arc::new(RadialGrid::uniform(phi.grid().r_max(), 257)?);
    let rho_hat = spatial_density(&DistributionView::gridded(&fhat), &radial)?;
    let field_hat = solve_radial_field(&rho_hat)?;
    let h_cin = fhat.integral_of(|_, w, _, v| 0.5 * w * w * v);
    let h_hat = h_cin - potential_energy_of_density(&rho_hat)?;

    let r_max = radial.r_max();
    let mass_phi = 4.0 * std::f64::consts::PI * r_max * r_max * dphi.eval(r_max);
    let diff = RadialProfile::new(
        Arc::clone(&radial),
        radial
            .nodes()
            .iter()
            .map(|&r| dphi.eval(r) - field_hat.dphi.eval(r))
            .collect(),
        Extrapolation::CoefOverR2((mass_phi - field_hat.mass) / (4.0 * std::f64::consts::PI)),
    )?;
    let tail =
        (mass_phi - field_hat.mass).powi(2) / (8.0 * std::f64::consts::PI * r_max);
    let mismatch = 0.5 * integrate_radial(&diff, |r| diff.eval(r))? + tail;
    Ok(h_hat + mismatch)
}
