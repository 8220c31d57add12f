//! Pass/fail check suites over a built model: inequality families, kernel
//! residuals and rearrangement identities. Shared by the command-line
//! `check` verbs and the acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::EquilibriumModel;
use crate::functionals::{
    interpolation_check, BoxDistribution, DistributionView, GriddedF, PhaseGrid,
};
use crate::linearized::{
    antonov_check, constrained_coercivity_probe, edge_weight, fprime_weighted_integral,
    free_energy, m_inner_product, parallel_pressure_identity, projection_p, reduced_hessian,
    schrodinger_residual, translation_mode_free_energy, translation_mode_m_residual, FieldGrid,
    Parity, PerturbationField, SpatialPerturbation,
};
use crate::radial::{Extrapolation, RadialProfile};
use crate::rearrangement::{
    energy_volume, monotonicity_chain, rearrange_by_energy, rearrangement_energy_lemma_check,
    uniform_ball_potential,
};

/// One verified quantity: `value` against its `tolerance` under the
/// convention stated in `form` (residuals pass below tolerance, margins
/// pass above the negated tolerance).
#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub form: String,
    pub value: f64,
    pub tolerance: f64,
    pub verdict: bool,
}

impl CheckItem {
    fn residual(form: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckItem {
            form: form.into(),
            value,
            tolerance,
            verdict: value.abs() <= tolerance,
        }
    }

    fn margin(form: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckItem {
            form: form.into(),
            value,
            tolerance,
            verdict: value >= -tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub items: Vec<CheckItem>,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: impl Into<String>, items: Vec<CheckItem>) -> Self {
        let passed = items.iter().all(|i| i.verdict);
        CheckReport {
            name: name.into(),
            items,
            passed,
        }
    }
}

/// Interpolation inequality over a randomized family of box indicators:
/// no violation across exponents and invariance of both ratios under the
/// four-parameter symmetry.
pub fn check_interpolation(seed: u64, family: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponents = [1.5, 2.0, 3.0, f64::INFINITY];
    let mut min_density_ratio = f64::INFINITY;
    let mut min_potential_ratio = f64::INFINITY;
    let mut worst_invariance: f64 = 0.0;
    for _ in 0..family {
        let b = BoxDistribution {
            amplitude: 0.2 + 2.0 * rng.random::<f64>(),
            x_radius: 0.4 + 2.0 * rng.random::<f64>(),
            v_radius: 0.4 + 2.0 * rng.random::<f64>(),
        };
        let g = b.to_gridded(40, 40, 8);
        let view = DistributionView::gridded(&g);
        // Symmetry action: the transformed box is again a box.
        let (gamma, lambda, mu) = (
            0.5 + rng.random::<f64>(),
            0.5 + rng.random::<f64>(),
            0.5 + rng.random::<f64>(),
        );
        let bt = BoxDistribution {
            amplitude: gamma * b.amplitude,
            x_radius: lambda * b.x_radius,
            v_radius: b.v_radius / mu,
        };
        let gt = bt.to_gridded(40, 40, 8);
        let viewt = DistributionView::gridded(&gt);
        for &p in &exponents {
            let chk = interpolation_check(&view, p).unwrap();
            let chkt = interpolation_check(&viewt, p).unwrap();
            min_density_ratio = min_density_ratio.min(chk.density_ratio());
            min_potential_ratio = min_potential_ratio.min(chk.potential_ratio().unwrap());
            let inv_d = (chkt.density_ratio() / chk.density_ratio() - 1.0).abs();
            let inv_p =
                (chkt.potential_ratio().unwrap() / chk.potential_ratio().unwrap() - 1.0).abs();
            worst_invariance = worst_invariance.max(inv_d).max(inv_p);
        }
    }
    CheckReport::new(
        "interpolation",
        vec![
            CheckItem::margin(
                "min rhs/lhs of the density bound over the family (> 0)",
                min_density_ratio,
                0.0,
            ),
            CheckItem::margin(
                "min rhs/lhs of the field-energy bound over the family (> 0)",
                min_potential_ratio,
                0.0,
            ),
            CheckItem::residual(
                "worst relative ratio change under the symmetry action",
                worst_invariance,
                1e-6,
            ),
        ],
    )
}

fn random_even_factor(
    rng: &mut ChaCha8Rng,
    model: &EquilibriumModel,
) -> impl Fn(f64, f64, f64) -> f64 {
    let r_s = model.support_radius();
    let r0 = (0.15 + 0.5 * rng.random::<f64>()) * r_s;
    let sr = (0.15 + 0.3 * rng.random::<f64>()) * r_s;
    let w_s = (2.0 * model.u_c()).sqrt();
    let w0 = 0.5 * w_s * rng.random::<f64>();
    let sw = (0.2 + 0.4 * rng.random::<f64>()) * w_s;
    let a0 = 2.0 * rng.random::<f64>() - 1.0;
    let a2 = 2.0 * rng.random::<f64>() - 1.0;
    move |r: f64, w: f64, c: f64| {
        (a0 + a2 * c * c)
            * (-((r - r0) / sr).powi(2)).exp()
            * (-((w - w0) / sw).powi(2)).exp()
    }
}

/// Antonov coercivity on random odd spherical fields plus the embedded
/// velocity-moment identity at sampled radii.
pub fn check_antonov(model: &EquilibriumModel, seed: u64, fields: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = FieldGrid::for_model(model, 64, 64, 16);
    let mut min_gap = f64::INFINITY;
    let mut min_rhs = f64::INFINITY;
    for _ in 0..fields {
        let shape = random_even_factor(&mut rng, model);
        let q =
            PerturbationField::from_fn(std::sync::Arc::clone(&grid), Parity::Even, |r, w, c| {
                let e = 0.5 * w * w + model.phi().eval(r);
                shape(r, w, c) * edge_weight(model, e, 4)
            })
            .unwrap();
        let chk = antonov_check(&q, model).unwrap();
        let scale = chk.lhs.abs().max(chk.rhs.abs()).max(1e-300);
        min_gap = min_gap.min((chk.lhs - chk.rhs) / scale);
        min_rhs = min_rhs.min(chk.rhs / scale);
    }
    let mut identity_worst: f64 = 0.0;
    for i in 1..=10 {
        let r = 0.09 * i as f64 * model.support_radius();
        let (lhs, rhs) = parallel_pressure_identity(model, r);
        identity_worst = identity_worst.max((lhs - rhs).abs() / model.rho().values()[0]);
    }
    CheckReport::new(
        "antonov",
        vec![
            CheckItem::margin("min (lhs - rhs)/scale over odd fields", min_gap, 1e-6),
            CheckItem::margin("min rhs/scale over odd fields (>= 0)", min_rhs, 1e-6),
            CheckItem::residual(
                "velocity-moment identity -(1/3)∫F'|v|²dv = ρ at 10 radii",
                identity_worst,
                1e-6,
            ),
        ],
    )
}

/// Constrained positivity of `⟨M h, h⟩` on random fields projected onto
/// the admissible space, plus the definitional identity with the free
/// energy.
pub fn check_coercivity(model: &EquilibriumModel, seed: u64, fields: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = FieldGrid::for_model(model, 64, 64, 16);
    let mut min_probe = f64::INFINITY;
    let mut identity_worst: f64 = 0.0;
    for k in 0..fields {
        let shape = random_even_factor(&mut rng, model);
        let odd = k % 2 == 1;
        let h = PerturbationField::from_fn(
            std::sync::Arc::clone(&grid),
            if odd { Parity::Odd } else { Parity::Even },
            |r, w, c| {
                let e = 0.5 * w * w + model.phi().eval(r);
                let par = if odd { c } else { 1.0 };
                par * shape(r, w, c.abs()) * edge_weight(model, e, 4)
            },
        )
        .unwrap();
        let probe = constrained_coercivity_probe(&h, model).unwrap();
        let scale = h
            .weighted_integral(|r, w, _, v| {
                let e = 0.5 * w * w + model.phi().eval(r);
                let fp = model.fprime_at_energy(e);
                if fp < 0.0 {
                    -v * v / fp
                } else {
                    0.0
                }
            })
            .max(1e-300);
        min_probe = min_probe.min(probe / scale);
        let f = free_energy(&h, model).unwrap();
        let mhh = m_inner_product(&h, model).unwrap();
        identity_worst = identity_worst.max((f - mhh).abs() / f.abs().max(1e-300));
    }
    CheckReport::new(
        "coercivity",
        vec![
            CheckItem::margin(
                "min ⟨M h_Z, h_Z⟩ / ⟨h, h⟩_μ over random fields",
                min_probe,
                1e-6,
            ),
            CheckItem::residual("⟨M h, h⟩ = F(h) relative deviation", identity_worst, 1e-12),
        ],
    )
}

/// Kernel residuals of the translation modes and positivity of the reduced
/// Hessian on radial directions.
pub fn check_kernel(model: &EquilibriumModel, seed: u64) -> CheckReport {
    let (fe_val, fe_scale) = translation_mode_free_energy(model);
    let m_res = translation_mode_m_residual(model);

    let sp1 = SpatialPerturbation::new(model.dphi().clone(), 1).unwrap();
    let d2j_translation = reduced_hessian(model, &sp1).unwrap();
    let grad_scale = {
        let nodes = model.dphi().grid().nodes();
        let vals = model.dphi().values();
        let du = crate::radial::numdiff::derivative_on_grid(nodes, vals);
        let mut acc = 0.0;
        for k in 0..nodes.len() - 1 {
            let f = |i: usize| {
                let r: f64 = nodes[i];
                (du[i] * du[i]
                    + if r > 0.0 { 2.0 * vals[i] * vals[i] / (r * r) } else { 0.0 })
                    * r
                    * r
            };
            acc += 0.5 * (f(k) + f(k + 1)) * (nodes[k + 1] - nodes[k]);
        }
        acc
    };

    let schro = schrodinger_residual(model, &sp1).unwrap();
    let veff = crate::linearized::effective_potential(model);
    let schro_scale = model
        .dphi()
        .grid()
        .nodes()
        .iter()
        .map(|&r| (veff.eval(r) * model.dphi().eval(r)).abs())
        .fold(0.0_f64, f64::max);
    let r_s = model.support_radius();
    let schro_worst = schro
        .grid()
        .nodes()
        .iter()
        .zip(schro.values())
        .filter(|(&r, _)| r > 0.02 * r_s && r < 0.98 * r_s)
        .map(|(_, v)| v.abs())
        .fold(0.0_f64, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_radial = f64::INFINITY;
    for _ in 0..20 {
        let r0 = (0.15 + 0.6 * rng.random::<f64>()) * r_s;
        let s = (0.08 + 0.25 * rng.random::<f64>()) * r_s;
        let a = 0.5 + rng.random::<f64>();
        let u = RadialProfile::from_fn(model.phi().grid_arc(), Extrapolation::Zero, |r| {
            a * (-((r - r0) / s).powi(2)).exp() * (r / r_s).powi(2)
        })
        .unwrap();
        let sp = SpatialPerturbation::new(u, 0).unwrap();
        let val = reduced_hessian(model, &sp).unwrap();
        min_radial = min_radial.min(val);
    }

    // Projection orthogonality for a basis of polynomial test functions.
    let h = RadialProfile::from_fn(model.phi().grid_arc(), Extrapolation::Zero, |r| {
        1.0 / (1.0 + (r / r_s) * (r / r_s))
    })
    .unwrap();
    let ph = projection_p(&h, model, 256);
    let scale = fprime_weighted_integral(model, |r, _| h.eval(r).powi(2));
    let mut ortho_worst: f64 = 0.0;
    for degree in 0..8 {
        let res = fprime_weighted_integral(model, |r, e| {
            (h.eval(r) - ph.eval(e)) * ((e - model.phi_c()) / model.u_c()).powi(degree)
        });
        let norm = fprime_weighted_integral(model, |_, e| {
            ((e - model.phi_c()) / model.u_c()).powi(2 * degree)
        })
        .sqrt()
            * scale.sqrt();
        ortho_worst = ortho_worst.max(res.abs() / norm.max(1e-300));
    }

    CheckReport::new(
        "kernel",
        vec![
            CheckItem::residual("F(∂_x1 f0) / natural scale", fe_val / fe_scale, 1e-4),
            CheckItem::residual("M ∂_x1 f0 dipole residual", m_res, 1e-4),
            CheckItem::residual("D²J(∂_x1 φ) / ‖∇h‖²", d2j_translation / grad_scale, 1e-4),
            CheckItem::residual(
                "A(φ') residual sup / ‖V φ'‖ (ℓ=1)",
                schro_worst / schro_scale,
                1e-4,
            ),
            CheckItem::margin("min D²J over 20 random radial fields (> 0)", min_radial, 0.0),
            CheckItem::residual(
                "projection orthogonality over 8 polynomial weights",
                ortho_worst,
                1e-6,
            ),
        ],
    )
}

/// Fixed point, energy lemma, monotonicity chain and the closed-form ball
/// volume.
pub fn check_rearrangement(model: &EquilibriumModel, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let view = DistributionView::model(model);
    let cells = view.to_gridded(PhaseGrid::default_for(model)).0;

    // Fixed point: the steady state is invariant under its own
    // rearrangement.
    let fhat = rearrange_by_energy(&cells, model.phi());
    let scale = cells.max_abs();
    let fixed_point_dev = cells
        .values
        .iter()
        .zip(&fhat.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max)
        / scale;

    // Energy lemma on random nonnegative fields.
    let mut lemma_worst: f64 = -f64::INFINITY;
    for _ in 0..50 {
        let shape = random_even_factor(&mut rng, model);
        let f = GriddedF::from_fn(cells.grid, |r, w, c| shape(r, w, c).abs());
        let (lhs, rhs) = rearrangement_energy_lemma_check(&f, model.phi());
        let s = rhs.abs().max(lhs.abs()).max(1e-300);
        lemma_worst = lemma_worst.max((lhs - rhs) / s);
    }

    // Monotonicity chain on perturbed distributions.
    let mut chain_worst: f64 = -f64::INFINITY;
    for k in 0..20 {
        let f = perturbed_state(model, &cells, &mut rng, k);
        let chain = monotonicity_chain(&f).unwrap();
        let tol_unit = chain.h_f.abs().max(1e-300);
        chain_worst = chain_worst
            .max((chain.j_mid - chain.h_f) / tol_unit)
            .max((chain.h_fhat - chain.j_mid) / tol_unit);
    }

    // Closed-form energy-ball volume of the uniform ball.
    let phi = uniform_ball_potential(513);
    let ball = energy_volume(&phi, -1.0 / 3.0).unwrap();
    let exact = std::f64::consts::PI.powi(3) / (18.0 * 3.0_f64.sqrt());

    CheckReport::new(
        "rearrangement",
        vec![
            CheckItem::residual("sup |f̂0 - f0| / max f0", fixed_point_dev, 1e-10),
            CheckItem::residual(
                "max (lhs - rhs)/scale of the energy lemma (<= 0 expected)",
                lemma_worst.max(0.0),
                1e-10,
            ),
            CheckItem::residual(
                "max chain violation / |H| over perturbed states",
                chain_worst.max(0.0),
                1e-6,
            ),
            CheckItem::residual(
                "uniform-ball μ(-1/3) vs π³/(18√3), relative",
                (ball - exact) / exact,
                1e-6,
            ),
        ],
    )
}

/// A family of perturbed distributions on the model grid: scalings,
/// energy-band value exchanges and additive bumps.
fn perturbed_state(
    model: &EquilibriumModel,
    base: &GriddedF,
    rng: &mut ChaCha8Rng,
    index: usize,
) -> GriddedF {
    let e0 = model.e0();
    let phic = model.phi_c();
    match index % 3 {
        0 => {
            let gamma = 0.8 + 0.4 * rng.random::<f64>();
            GriddedF {
                grid: base.grid,
                values: base.values.iter().map(|v| gamma * v).collect(),
            }
        }
        1 => {
            // Exchange the inner and outer energy halves (far from
            // decreasing in E).
            let mid = phic + (0.3 + 0.4 * rng.random::<f64>()) * (e0 - phic);
            GriddedF::from_fn(base.grid, |r, w, _| {
                let e = 0.5 * w * w + model.phi().eval(r);
                if e > e0 {
                    0.0
                } else if e < mid {
                    model.f_at_energy(mid + (e0 - mid) * (e - phic) / (mid - phic))
                } else {
                    model.f_at_energy(phic + (mid - phic) * (e - mid) / (e0 - mid))
                }
            })
        }
        _ => {
            let r0 = (0.2 + 0.5 * rng.random::<f64>()) * model.support_radius();
            let amp = 0.2 * rng.random::<f64>() * model.f_max();
            GriddedF::from_fn(base.grid, |r, w, _| {
                let e = 0.5 * w * w + model.phi().eval(r);
                let bump = if e < e0 {
                    amp * (-((r - r0) / (0.2 * model.support_radius())).powi(2)).exp()
                        * (1.0 - (e - phic) / (e0 - phic))
                } else {
                    0.0
                };
                model.f_at_energy(e) + bump
            })
        }
    }
}
