//! Phase volumes of energy balls: `μ_φ(E) = |{(x,v) : E_φ(x,v) < E}|`.

use std::sync::Arc;

use super::RearrangeError;
use crate::radial::{quad::QuadRule, Direction, MonotoneMap, RadialProfile};

/// `μ_φ(E) = (4π/3) ∫ (2(E - φ(x)))_+^{3/2} dx`, increasing in `E` on
/// `[min φ, 0)`; rejects `E ≥ 0` where the shell volume is infinite.
pub fn energy_volume(phi: &RadialProfile, e: f64) -> Result<f64, RearrangeError> {
    if e >= 0.0 {
        return Err(RearrangeError::UnboundEnergyShell(e));
    }
    energy_volume_at(phi, e)
}

/// Implementation without the sign guard, shared by the level machinery
/// (which never asks for `E ≥ 0`).
pub(crate) fn energy_volume_at(phi: &RadialProfile, e: f64) -> Result<f64, RearrangeError> {
    if e <= phi.eval(0.0) {
        return Ok(0.0);
    }
    let r_e = turning_radius(phi, e)?;
    // Substitution r = r_e - t² makes the integrand smooth at the turning
    // point where (E - φ) vanishes linearly.
    let rule = QuadRule::new(16);
    let sqrt_re = r_e.sqrt();
    let integral = rule.integrate_cells(0.0, sqrt_re, 32, |t| {
        let r = r_e - t * t;
        let depth = (e - phi.eval(r)).max(0.0);
        2.0 * t * r * r * (2.0 * depth).powf(1.5)
    });
    Ok((4.0 * std::f64::consts::PI / 3.0) * 4.0 * std::f64::consts::PI * integral)
}

/// Radius where `φ(r) = E` (φ increasing to 0 at infinity).
fn turning_radius(phi: &RadialProfile, e: f64) -> Result<f64, RearrangeError> {
    let r_max = phi.grid().r_max();
    let phi_end = phi.eval(r_max);
    if e >= phi_end {
        // Exterior: φ = c/r with c = r_max·φ(r_max) < 0.
        let c = r_max * phi_end;
        if c >= 0.0 {
            return Err(RearrangeError::UnboundPotential);
        }
        return Ok(c / e);
    }
    let mut lo = 0.0;
    let mut hi = r_max;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phi.eval(mid) < e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sampled bijection `E ↦ μ_φ(E)` on `[min φ, e_hi]`.
#[derive(Debug, Clone)]
pub struct EnergyVolumeMap {
    map: MonotoneMap,
}

impl EnergyVolumeMap {
    pub fn build(phi: &RadialProfile, e_hi: f64, samples: usize) -> Result<Self, RearrangeError> {
        assert!(samples >= 8);
        let e_lo = phi.eval(0.0);
        if !(e_hi > e_lo && e_hi < 0.0) {
            return Err(RearrangeError::UnboundEnergyShell(e_hi));
        }
        let es: Vec<f64> = (0..samples)
            .map(|k| e_lo + (e_hi - e_lo) * k as f64 / (samples - 1) as f64)
            .collect();
        let vols = es
            .iter()
            .map(|&e| energy_volume_at(phi, e))
            .collect::<Result<Vec<f64>, _>>()?;
        Ok(EnergyVolumeMap {
            map: MonotoneMap::new_flattened(es, vols, Direction::Increasing)?,
        })
    }

    pub fn volume_at(&self, e: f64) -> f64 {
        self.map.eval(e)
    }

    /// Energy of the ball with the given volume (generalized inverse).
    pub fn energy_of_volume(&self, v: f64) -> (f64, bool) {
        self.map.invert(v)
    }

    pub fn as_map(&self) -> &MonotoneMap {
        &self.map
    }
}

/// Ball-test helper: the potential of the unit uniform ball.
pub fn uniform_ball_potential(nodes: usize) -> RadialProfile {
    let grid = Arc::new(crate::radial::RadialGrid::uniform(1.0, nodes).unwrap());
    RadialProfile::new(
        grid,
        (0..nodes)
            .map(|k| {
                let r = k as f64 / (nodes - 1) as f64;
                r * r / 6.0 - 0.5
            })
            .collect(),
        crate::radial::Extrapolation::CoefOverR(-1.0 / 3.0),
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_volume_oracle() {
        // Uniform ball, E = -1/3: μ = π³/(18√3).
        let phi = uniform_ball_potential(513);
        let v = energy_volume(&phi, -1.0 / 3.0).unwrap();
        let exact = PI.powi(3) / (18.0 * 3.0_f64.sqrt());
        assert!((v - exact).abs() < 1e-6 * exact, "{v} vs {exact}");
    }

    #[test]
    fn empty_below_minimum() {
        let phi = uniform_ball_potential(65);
        assert_eq!(energy_volume(&phi, -0.6).unwrap(), 0.0);
        assert_eq!(energy_volume(&phi, -0.5).unwrap(), 0.0);
    }

    #[test]
    fn rejects_unbound_energy() {
        let phi = uniform_ball_potential(65);
        assert!(matches!(
            energy_volume(&phi, 0.0),
            Err(RearrangeError::UnboundEnergyShell(_))
        ));
    }

    #[test]
    fn volume_is_increasing_and_invertible() {
        let phi = uniform_ball_potential(257);
        let map = EnergyVolumeMap::build(&phi, -0.05, 128).unwrap();
        let vols: Vec<f64> = map.as_map().values().to_vec();
        assert!(vols.windows(2).all(|w| w[1] >= w[0]));
        for &e in &[-0.45, -0.3, -0.2, -0.1] {
            let v = map.volume_at(e);
            let (back, clamped) = map.energy_of_volume(v);
            assert!(!clamped);
            assert!((back - e).abs() < 1e-8, "e={e}, back={back}");
        }
    }

    #[test]
    fn volume_scales_with_symmetry_action() {
        // Under (x, v) → (x/λ, μv) with the matching potential scaling
        // φ_g(r) = μ^{-2} φ(r/λ), the energy ball at μ^{-2}E is the image of
        // the ball at E, so its volume is λ³μ^{-3} times the original.
        let phi = uniform_ball_potential(513);
        let (lambda, mu) = (1.4_f64, 0.8_f64);
        let grid = Arc::new(crate::radial::RadialGrid::uniform(lambda, 513).unwrap());
        let phi_g = RadialProfile::new(
            grid,
            (0..513)
                .map(|k| {
                    let r = lambda * k as f64 / 512.0;
                    phi.eval(r / lambda) / (mu * mu)
                })
                .collect(),
            crate::radial::Extrapolation::CoefOverR(-lambda / (3.0 * mu * mu)),
        )
        .unwrap();
        let e = -0.3;
        let v = energy_volume(&phi, e).unwrap();
        let v_g = energy_volume(&phi_g, e / (mu * mu)).unwrap();
        let expect = lambda.powi(3) * mu.powi(-3) * v;
        assert!((v_g - expect).abs() < 1e-6 * v_g, "{v_g} vs {expect}");
    }
}
