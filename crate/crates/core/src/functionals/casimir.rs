//! Casimir functionals `∫ C(f) dx dv` and the Lebesgue norms they induce.

use std::sync::Arc;

use super::view::DistributionView;
use super::FunctionalsError;
use crate::radial::{integrate_radial, velocity_moment, Extrapolation, RadialProfile};

/// Phase-space integral of `C(f)` for `C(0) = 0`, `C ≥ 0`.
///
/// Analytic views integrate `C(γ F(E))` in the energy variable and rescale
/// the volume element by `λ³μ^{-3}`; ensembles go through their binned
/// density (weights are measures, not densities).
pub fn casimir(
    f: &DistributionView,
    c: impl Fn(f64) -> f64 + Sync,
) -> Result<f64, FunctionalsError> {
    // C(0) ≠ 0 would make the integral diverge over the empty region.
    if c(0.0) != 0.0 {
        return Err(FunctionalsError::CasimirAtZero(c(0.0)));
    }
    match f {
        DistributionView::Analytic(tm) => {
            let model = tm.base;
            let gamma = tm.params.gamma;
            let volume_factor = (tm.params.lambda / tm.params.mu).powi(3);
            let grid = model.rho().grid_arc();
            let nodes = grid.nodes();
            let values: Vec<f64> = crate::exec::map_collect(nodes, |&r| {
                velocity_moment(
                    |e| c(gamma * model.f_at_energy(e)),
                    model.phi().eval(r),
                    model.e0(),
                    0,
                )
                .unwrap()
            });
            let profile = RadialProfile::new(Arc::clone(&grid), values, Extrapolation::Zero)?;
            Ok(volume_factor * integrate_radial(&profile, |_| 1.0)?)
        }
        DistributionView::Ensemble { grid, .. } => {
            let (binned, _clipped) = f.to_gridded(*grid);
            Ok(binned.integral_of(|_, _, _, v| c(v)))
        }
        DistributionView::Gridded(g) => Ok(g.integral_of(|_, _, _, v| c(v))),
    }
}

/// `‖f‖_p` via the Casimir `C(t) = |t|^p`; `p = ∞` is the essential sup
/// (maximum sampled value). Unsupported for `p < 1`.
pub fn lp_norm(f: &DistributionView, p: f64) -> Result<f64, FunctionalsError> {
    if p < 1.0 || p.is_nan() {
        return Err(FunctionalsError::UnsupportedNorm(p));
    }
    if p.is_infinite() {
        return Ok(match f {
            DistributionView::Analytic(tm) => tm.lp_factor(f64::INFINITY) * tm.base.f_max(),
            DistributionView::Ensemble { grid, .. } => {
                let (binned, _) = f.to_gridded(*grid);
                binned.max_abs()
            }
            DistributionView::Gridded(g) => g.max_abs(),
        });
    }
    if p == 1.0 {
        return casimir(f, |t| t.abs());
    }
    Ok(casimir(f, |t| t.abs().powf(p))?.powf(1.0 / p))
}
