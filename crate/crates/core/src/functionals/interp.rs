//! The interpolation inequality linking the density, the kinetic energy and
//! the invariant Lebesgue norms, evaluated with the constant omitted:
//!
//! `‖ρ_f‖_{L^q} ≤ C ‖f‖_{L^p}^{2p/(5p-3)} H_cin^{(3p-3)/(5p-3)}`,
//! `q = (5p-3)/(3p-1)`, and for `p > 9/7` the field-energy bound
//! `H_pot ≤ C ‖f‖_1^{(7p-9)/(6(p-1))} ‖f‖_p^{p/(3(p-1))} H_cin^{1/2}`.

use std::sync::Arc;

use super::casimir::lp_norm;
use super::energy::{energy_report, spatial_density};
use super::view::DistributionView;
use super::FunctionalsError;
use crate::radial::{integrate_radial, RadialGrid};

/// Critical exponent below which the field-energy bound fails.
pub const P_CRITICAL: f64 = 9.0 / 7.0;

#[derive(Debug, Clone, Copy)]
pub struct InterpolationCheck {
    /// `‖ρ_f‖_{L^q}` with `q = (5p-3)/(3p-1)`.
    pub lhs_rho: f64,
    /// `‖f‖_p^{2p/(5p-3)} H_cin^{(3p-3)/(5p-3)}`.
    pub rhs_factor: f64,
    /// `H_pot`, only meaningful for `p > 9/7`.
    pub pot_lhs: Option<f64>,
    /// `‖f‖_1^{(7p-9)/(6(p-1))} ‖f‖_p^{p/(3(p-1))} H_cin^{1/2}`.
    pub pot_rhs_factor: Option<f64>,
}

impl InterpolationCheck {
    /// `rhs/lhs` of the density bound; bounded below by `1/C > 0`.
    pub fn density_ratio(&self) -> f64 {
        self.rhs_factor / self.lhs_rho
    }

    /// `rhs/lhs` of the field-energy bound.
    pub fn potential_ratio(&self) -> Result<f64, FunctionalsError> {
        match (self.pot_lhs, self.pot_rhs_factor) {
            (Some(lhs), Some(rhs)) => Ok(rhs / lhs),
            _ => Err(FunctionalsError::SupercriticalExponent),
        }
    }
}

/// Exponents of the density bound `(q, a_p, a_cin)`; the limit `p = ∞`
/// uses `(5/3, 2/5, 3/5)` exactly.
pub fn density_bound_exponents(p: f64) -> (f64, f64, f64) {
    if p.is_infinite() {
        (5.0 / 3.0, 2.0 / 5.0, 3.0 / 5.0)
    } else {
        (
            (5.0 * p - 3.0) / (3.0 * p - 1.0),
            2.0 * p / (5.0 * p - 3.0),
            (3.0 * p - 3.0) / (5.0 * p - 3.0),
        )
    }
}

/// Exponents of the field-energy bound `(e_1, e_p)`; `p = ∞` gives
/// `(7/6, 1/3)`.
pub fn potential_bound_exponents(p: f64) -> (f64, f64) {
    if p.is_infinite() {
        (7.0 / 6.0, 1.0 / 3.0)
    } else {
        (
            (7.0 * p - 9.0) / (6.0 * (p - 1.0)),
            p / (3.0 * (p - 1.0)),
        )
    }
}

pub fn interpolation_check(
    f: &DistributionView,
    p: f64,
) -> Result<InterpolationCheck, FunctionalsError> {
    if p <= 1.0 || p.is_nan() {
        return Err(FunctionalsError::UnsupportedNorm(p));
    }
    let (q, a_p, a_cin) = density_bound_exponents(p);
    let report = energy_report(f)?;
    let norm_p = lp_norm(f, p)?;
    let lhs_rho = density_lq_norm(f, q)?;
    let rhs_factor = norm_p.powf(a_p) * report.h_cin.powf(a_cin);

    let (pot_lhs, pot_rhs_factor) = if p > P_CRITICAL {
        let (e1, ep) = potential_bound_exponents(p);
        let norm_1 = report.lp_norms["1"];
        (
            Some(report.h_pot),
            Some(norm_1.powf(e1) * norm_p.powf(ep) * report.h_cin.sqrt()),
        )
    } else {
        (None, None)
    };
    Ok(InterpolationCheck {
        lhs_rho,
        rhs_factor,
        pot_lhs,
        pot_rhs_factor,
    })
}

fn density_lq_norm(f: &DistributionView, q: f64) -> Result<f64, FunctionalsError> {
    match f {
        DistributionView::Analytic(tm) => {
            let base = tm.base;
            let norm = integrate_radial(base.rho(), |r| base.rho().eval(r).powf(q - 1.0))?
                .powf(1.0 / q);
            let p = &tm.params;
            Ok(p.gamma * p.mu.powi(-3) * p.lambda.powf(3.0 / q) * norm)
        }
        _ => {
            let grid = match f.phase_grid() {
                Some(g) => Arc::new(RadialGrid::uniform(g.r_max, 257)?),
                None => unreachable!("analytic handled above"),
            };
            let rho = spatial_density(f, &grid)?;
            Ok(
                integrate_radial(&rho, |r| rho.eval(r).abs().powf(q - 1.0))?
                    .powf(1.0 / q),
            )
        }
    }
}

/// An isotropic box indicator `A·1{|x|<a, |v|<b}` on a phase grid aligned so
/// the edges land on cell boundaries; every grid functional of it is then a
/// finite exact sum. Closed forms for the comparison oracles:
/// mass `A V_a V_b`, `H_cin = (3/10) A V_a V_b b²`,
/// `H_pot = 4π ρ0² a⁵/15` with `ρ0 = A V_b`, `V_x = (4π/3)x³`.
#[derive(Debug, Clone, Copy)]
pub struct BoxDistribution {
    pub amplitude: f64,
    pub x_radius: f64,
    pub v_radius: f64,
}

impl BoxDistribution {
    pub fn to_gridded(&self, n_r: usize, n_w: usize, n_c: usize) -> super::gridded::GriddedF {
        // Box edges on cell boundaries: 80% of the extents.
        let grid = super::gridded::PhaseGrid {
            n_r,
            n_w,
            n_c,
            r_max: self.x_radius * 1.25,
            w_max: self.v_radius * 1.25,
        };
        let (a, b, amp) = (self.x_radius, self.v_radius, self.amplitude);
        super::gridded::GriddedF::from_fn(grid, |r, w, _| {
            if r < a && w < b {
                amp
            } else {
                0.0
            }
        })
    }

    pub fn mass(&self) -> f64 {
        let va = ball_volume(self.x_radius);
        let vb = ball_volume(self.v_radius);
        self.amplitude * va * vb
    }

    pub fn h_cin(&self) -> f64 {
        0.3 * self.mass() * self.v_radius * self.v_radius
    }

    pub fn h_pot(&self) -> f64 {
        let rho0 = self.amplitude * ball_volume(self.v_radius);
        4.0 * std::f64::consts::PI * rho0 * rho0 * self.x_radius.powi(5) / 15.0
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.amplitude
        } else {
            self.amplitude
                * (ball_volume(self.x_radius) * ball_volume(self.v_radius)).powf(1.0 / p)
        }
    }

    pub fn rho_lq_norm(&self, q: f64) -> f64 {
        let rho0 = self.amplitude * ball_volume(self.v_radius);
        rho0 * ball_volume(self.x_radius).powf(1.0 / q)
    }
}

fn ball_volume(r: f64) -> f64 {
    4.0 * std::f64::consts::PI / 3.0 * r.powi(3)
}
