//! The effective potential `V = -∫F'(E)dv`, the stationary Schrödinger
//! operator `A = Δ + V`, the energy-average projection `P` and the reduced
//! Hessian `D²J`.


use super::LinearizedError;
use crate::equilibrium::EquilibriumModel;
use crate::radial::numdiff::{derivative_on_grid, fd_weights};
use crate::radial::quad::QuadRule;
use crate::radial::{integrate_radial, Extrapolation, RadialProfile};

/// A single spherical-harmonic component `u(r) Y_ℓ` of a spatial
/// perturbation (`m` is suppressed by degeneracy; `Y` is unit-normalized).
#[derive(Debug, Clone)]
pub struct SpatialPerturbation {
    pub u: RadialProfile,
    pub ell: u32,
}

impl SpatialPerturbation {
    pub fn new(u: RadialProfile, ell: u32) -> Result<Self, LinearizedError> {
        if ell >= 1 && u.values()[0] != 0.0 {
            return Err(LinearizedError::OriginValue(ell));
        }
        Ok(SpatialPerturbation { u, ell })
    }
}

/// `V(r) = -∫ F'(E) dv = dρ/du` at the local depth; nonnegative with
/// compact support.
pub fn effective_potential(model: &EquilibriumModel) -> RadialProfile {
    RadialProfile::from_fn(model.rho().grid_arc(), Extrapolation::Zero, |r| {
        model.law().density_slope_of_depth(model.depth_at(r))
    })
    .expect("finite effective potential")
}

/// Residual profile of `A_ℓ u = u'' + (2/r)u' - ℓ(ℓ+1)u/r² + V u` by
/// five-point differences of the nodal values.
pub fn schrodinger_residual(
    model: &EquilibriumModel,
    sp: &SpatialPerturbation,
) -> Result<RadialProfile, LinearizedError> {
    let veff = effective_potential(model);
    let nodes = sp.u.grid().nodes();
    let n = nodes.len();
    let vals = sp.u.values();
    let du = derivative_on_grid(nodes, vals);
    let mut ddu = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(2).min(n - 5);
        let w = fd_weights(nodes[i], &nodes[lo..lo + 5], 2);
        ddu[i] = w.iter().zip(&vals[lo..lo + 5]).map(|(w, y)| w * y).sum();
    }
    let ll = (sp.ell * (sp.ell + 1)) as f64;
    let mut res = vec![0.0; n];
    for i in 1..n - 1 {
        let r = nodes[i];
        res[i] = ddu[i] + 2.0 * du[i] / r - ll * vals[i] / (r * r) + veff.eval(r) * vals[i];
    }
    Ok(RadialProfile::new(
        sp.u.grid_arc(),
        res,
        Extrapolation::Zero,
    )?)
}

/// Sampled function of the energy produced by the projection `P`.
#[derive(Debug, Clone)]
pub struct EnergyFunction {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
}

impl EnergyFunction {
    /// Local cubic Lagrange interpolation of the samples.
    pub fn eval(&self, e: f64) -> f64 {
        let n = self.energies.len();
        if e <= self.energies[0] {
            return self.values[0];
        }
        if e >= self.energies[n - 1] {
            return self.values[n - 1];
        }
        let k = self.energies.partition_point(|&x| x <= e) - 1;
        let lo = k.saturating_sub(1).min(n - 4);
        let xs = &self.energies[lo..lo + 4];
        let ys = &self.values[lo..lo + 4];
        let mut acc = 0.0;
        for i in 0..4 {
            let mut term = ys[i];
            for j in 0..4 {
                if i != j {
                    term *= (e - xs[j]) / (xs[i] - xs[j]);
                }
            }
            acc += term;
        }
        acc
    }
}

/// `(Ph)(E) = ∫(E-φ(y))_+^{1/2} h(y) dy / ∫(E-φ(y))_+^{1/2} dy`, the
/// orthogonal projection of a radial function onto functions of the energy
/// in the `|F'(E)|` inner product.
pub fn projection_p(
    h: &RadialProfile,
    model: &EquilibriumModel,
    samples: usize,
) -> EnergyFunction {
    assert!(samples >= 8);
    let phi = model.phi();
    let e_lo = model.phi_c();
    let e_hi = model.e0();
    let energies: Vec<f64> = (0..samples)
        .map(|k| e_lo + (e_hi - e_lo) * k as f64 / (samples - 1) as f64)
        .collect();
    let rule = QuadRule::new(16);
    let values = crate::exec::map_collect(&energies, |&e| {
        let r_e = radius_of_energy(model, e);
        if r_e <= 1e-12 * model.support_radius() {
            return h.eval(0.0);
        }
        // r = r_e - t² regularizes the square-root edge.
        let sqrt_re = r_e.sqrt();
        let moment = |g: &dyn Fn(f64) -> f64| {
            rule.integrate_cells(0.0, sqrt_re, 16, |t| {
                let r = r_e - t * t;
                let depth = (e - phi.eval(r)).max(0.0);
                2.0 * t * r * r * depth.sqrt() * g(r)
            })
        };
        let num = moment(&|r| h.eval(r));
        let den = moment(&|_| 1.0);
        num / den
    });
    EnergyFunction { energies, values }
}

fn radius_of_energy(model: &EquilibriumModel, e: f64) -> f64 {
    if e >= model.e0() {
        return model.support_radius();
    }
    if e <= model.phi_c() {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, model.support_radius());
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if model.phi().eval(mid) < e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫∫ |F'(E)| g(r, E) dx dv` over the support: for each radius an energy
/// integral with the edge substitution `E = φ + (E0-φ) sin²θ`.
pub fn fprime_weighted_integral(
    model: &EquilibriumModel,
    g: impl Fn(f64, f64) -> f64 + Sync,
) -> f64 {
    let rule = QuadRule::new(16);
    let nodes = model.phi().grid().nodes();
    let contributions = crate::exec::map_collect(nodes, |&r| {
        let phi_r = model.phi().eval(r);
        let u = model.e0() - phi_r;
        if u <= 0.0 {
            return 0.0;
        }
        // ∫ dv |F'| g = 4π√2 ∫ (E-φ)^{1/2} |F'(E)| g dE.
        let inner = rule.integrate_cells(0.0, 0.5 * std::f64::consts::PI, 4, |theta| {
            let (s, c) = theta.sin_cos();
            let e = phi_r + u * s * s;
            let fp = model.fprime_at_energy(e);
            2.0 * u * s * c * (u * s * s).sqrt() * (-fp) * g(r, e)
        });
        4.0 * std::f64::consts::PI * 2.0_f64.sqrt() * inner
    });
    // 4π ∫ r² (…) dr on the model grid by the profile quadrature.
    let profile = RadialProfile::new(
        model.phi().grid_arc(),
        contributions,
        Extrapolation::Zero,
    )
    .expect("finite integrand");
    integrate_radial(&profile, |_| 1.0).unwrap()
}

/// The reduced Hessian `D²J(φ_{f0})(h, h)` for `h = u(r) Y_ℓ`:
///
/// * `ℓ = 0`: `∫ u'² r² dr - (1/4π) ∫∫ |F'| [u - Pu]²`,
/// * `ℓ ≥ 1`: `∫ (u'² + ℓ(ℓ+1) u²/r²) r² dr - ∫ V u² r² dr`
///
/// (the spherical average of `Y_ℓ` vanishes, so `Ph = 0`), plus the exterior
/// gradient tail of the decaying multipole continuation.
pub fn reduced_hessian(
    model: &EquilibriumModel,
    sp: &SpatialPerturbation,
) -> Result<f64, LinearizedError> {
    let nodes = sp.u.grid().nodes();
    let vals = sp.u.values();
    let du = derivative_on_grid(nodes, vals);
    let ll = (sp.ell * (sp.ell + 1)) as f64;
    // Gradient part by trapezoid on the profile grid.
    let mut grad = 0.0;
    for k in 0..nodes.len() - 1 {
        let f = |i: usize| {
            let r = nodes[i];
            (du[i] * du[i] + if r > 0.0 { ll * vals[i] * vals[i] / (r * r) } else { 0.0 }) * r * r
        };
        grad += 0.5 * (f(k) + f(k + 1)) * (nodes[k + 1] - nodes[k]);
    }
    // Exterior continuation: the decaying multipole for ℓ ≥ 1; for ℓ = 0
    // constants are quotiented out, so the continuation is constant and
    // carries no gradient.
    if sp.ell >= 1 {
        let r_end = *nodes.last().unwrap();
        let u_end = *vals.last().unwrap();
        grad += (sp.ell as f64 + 1.0) * u_end * u_end * r_end;
    }

    let weight_term = if sp.ell == 0 {
        let p = projection_p(&sp.u, model, 192);
        fprime_weighted_integral(model, |r, e| {
            let d = sp.u.eval(r) - p.eval(e);
            d * d
        }) / (4.0 * std::f64::consts::PI)
    } else {
        let veff = effective_potential(model);
        let mut acc = 0.0;
        for k in 0..nodes.len() - 1 {
            let f = |i: usize| veff.eval(nodes[i]) * vals[i] * vals[i] * nodes[i] * nodes[i];
            acc += 0.5 * (f(k) + f(k + 1)) * (nodes[k + 1] - nodes[k]);
        }
        acc
    };
    Ok(grad - weight_term)
}
