//! The Antonov coercivity bound for odd perturbations:
//!
//! `F({h, f0}) ≥ -∫ F'(E) [ (x·v)² |{h/(x·v), E}|² + (φ'(r)/r) h² ] ≥ 0`
//!
//! for `h` spherically symmetric, odd in `v` and supported in the support
//! of `F'`. Callers supply the smooth factor `q = h/(x·v)` so the removable
//! singularity at `c = 0` never appears on the grid.

use std::sync::Arc;

use super::bracket::{bracket_with_e, check_support, dynamically_accessible};
use super::field::{Parity, PerturbationField};
use super::free_energy::free_energy;
use super::LinearizedError;
use crate::equilibrium::EquilibriumModel;
use crate::exec;
use crate::radial::parallel_moment_of_derivative;

#[derive(Debug, Clone, Copy)]
pub struct AntonovCheck {
    /// `F({h, f0})`.
    pub lhs: f64,
    /// The quadratic lower bound (pointwise nonnegative integrand).
    pub rhs: f64,
}

/// Runs the check for `h = (x·v)·q` with `q` even in the velocity.
pub fn antonov_check(
    q: &PerturbationField,
    model: &EquilibriumModel,
) -> Result<AntonovCheck, LinearizedError> {
    if q.parity != Parity::Even {
        return Err(LinearizedError::Parity);
    }
    let grid = Arc::clone(&q.grid);
    // h = r w c q is odd in v.
    let h = PerturbationField {
        grid: Arc::clone(&grid),
        values: exec::map_indexed(grid.cells(), |idx| {
            let (i, j, k) = grid.split(idx);
            grid.r(i) * grid.w(j) * grid.c(k) * q.values[idx]
        }),
        parity: Parity::Odd,
    };
    check_support(&h, model)?;

    let accessible = dynamically_accessible(&h, model)?;
    let lhs = free_energy(&accessible, model)?;

    let bracket_q = bracket_with_e(q, model)?;
    let rhs = exec::sum_indexed(grid.cells(), |idx| {
        let (i, j, k) = grid.split(idx);
        let (r, w, c) = (grid.r(i), grid.w(j), grid.c(k));
        let e = 0.5 * w * w + model.phi().eval(r);
        let fp = model.fprime_at_energy(e);
        if fp >= 0.0 {
            return 0.0;
        }
        let xv = r * w * c;
        let hv = h.values[idx];
        -fp * (xv * xv * bracket_q.values[idx].powi(2)
            + model.dphi().eval(r) / r * hv * hv)
            * grid.node_weight(i, j, k)
    });
    Ok(AntonovCheck { lhs, rhs })
}

/// The identity used inside the coercivity proof:
/// `-∫ ((x·v)/|x|)² F'(E) dv = ρ_{f0}(r)`. Returns `(lhs, rhs)` at `r`.
pub fn parallel_pressure_identity(model: &EquilibriumModel, r: f64) -> (f64, f64) {
    let lhs = parallel_moment_of_derivative(
        |e| model.fprime_at_energy(e),
        model.phi().eval(r),
        model.e0(),
    )
    .unwrap();
    (lhs, model.rho().eval(r))
}
