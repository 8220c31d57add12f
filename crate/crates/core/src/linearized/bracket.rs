//! The Poisson bracket with the steady microscopic energy and dynamically
//! accessible perturbations.

use std::sync::Arc;

use super::field::{Parity, PerturbationField};
use super::LinearizedError;
use crate::equilibrium::EquilibriumModel;
use crate::exec;

/// `{g, E}` with `E = |v|²/2 + φ(r)` for a spherically symmetric generator
/// `g(r, w, c)`:
///
/// `{g,E} = w c ∂_r g + (w/r)(1-c²) ∂_c g - φ'(r)[c ∂_w g + ((1-c²)/w) ∂_c g]`,
///
/// which flips the velocity parity.
pub fn bracket_with_e(
    g: &PerturbationField,
    model: &EquilibriumModel,
) -> Result<PerturbationField, LinearizedError> {
    let grid = Arc::clone(&g.grid);
    let d_r = g.d_dr();
    let d_w = g.d_dw();
    let d_c = g.d_dc();
    let dphi: Vec<f64> = (0..grid.n_r).map(|i| model.dphi().eval(grid.r(i))).collect();
    let values = exec::map_indexed(grid.cells(), |idx| {
        let (i, j, k) = grid.split(idx);
        let (r, w, c) = (grid.r(i), grid.w(j), grid.c(k));
        let s2 = 1.0 - c * c;
        w * c * d_r[idx] + (w / r) * s2 * d_c[idx]
            - dphi[i] * (c * d_w[idx] + s2 / w * d_c[idx])
    });
    let parity = match g.parity {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
        Parity::None => Parity::None,
    };
    // Parity of the output is exact by the algebra of the bracket; no
    // numerical re-validation (near-cancelling data would make it
    // ill-conditioned).
    Ok(PerturbationField {
        grid,
        values,
        parity,
    })
}

/// `h = {g, f0} = F'(E) {g, E}`, the tangent directions generated by
/// Hamiltonian deformations. The generator must vanish outside the support
/// of `F'`.
pub fn dynamically_accessible(
    g: &PerturbationField,
    model: &EquilibriumModel,
) -> Result<PerturbationField, LinearizedError> {
    check_support(g, model)?;
    let bracket = bracket_with_e(g, model)?;
    let grid = Arc::clone(&bracket.grid);
    let values = exec::map_indexed(grid.cells(), |idx| {
        let (i, j, _) = grid.split(idx);
        let e = 0.5 * grid.w(j) * grid.w(j) + model.phi().eval(grid.r(i));
        model.fprime_at_energy(e) * bracket.values[idx]
    });
    Ok(PerturbationField {
        grid,
        values,
        parity: bracket.parity,
    })
}

/// Rejects fields whose support touches `E ≥ E0`.
pub fn check_support(
    h: &PerturbationField,
    model: &EquilibriumModel,
) -> Result<(), LinearizedError> {
    let grid = &h.grid;
    let scale = h.max_abs().max(1e-300);
    for idx in 0..grid.cells() {
        let (i, j, _) = grid.split(idx);
        let e = 0.5 * grid.w(j) * grid.w(j) + model.phi().eval(grid.r(i));
        if e >= model.e0() && h.values[idx].abs() > 1e-12 * scale {
            return Err(LinearizedError::InaccessibleSupport);
        }
    }
    Ok(())
}

/// Polynomial factor `τ^p` with `τ = (E0 - E)/(E0 - φ_c)`, vanishing at the
/// support edge with `p - 1` continuous derivatives; used to build
/// admissible test fields that finite differences handle cleanly.
pub fn edge_weight(model: &EquilibriumModel, e: f64, power: i32) -> f64 {
    let tau = (model.e0() - e) / (model.e0() - model.phi_c());
    if tau <= 0.0 {
        0.0
    } else {
        tau.powi(power)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{build_equilibrium, AnsatzLaw};
    use crate::linearized::field::FieldGrid;
    use crate::radial::RadialGrid;

    fn model() -> EquilibriumModel {
        let law = AnsatzLaw::polytrope(1.0, 1.0).unwrap();
        build_equilibrium(&law, 1.0, &RadialGrid::uniform(10.0, 512).unwrap()).unwrap()
    }

    #[test]
    fn functions_of_energy_commute() {
        let m = model();
        let grid = FieldGrid::for_model(&m, 64, 64, 16);
        // g = u(E) smooth with edge cutoff: {g, E} = 0.
        let g = PerturbationField::from_fn(Arc::clone(&grid), Parity::Even, |r, w, _| {
            let e = 0.5 * w * w + m.phi().eval(r);
            (e - m.phi_c()).powi(2) * edge_weight(&m, e, 5)
        })
        .unwrap();
        let br = bracket_with_e(&g, &m).unwrap();
        let scale = g
            .weighted_integral(|_, _, _, v| v * v)
            .sqrt();
        let norm = br.weighted_integral(|_, _, _, v| v * v).sqrt();
        assert!(norm < 2e-3 * scale.max(1.0), "‖{{u(E),E}}‖ = {norm}");
    }

    #[test]
    fn bracket_of_radial_action_matches_hand_derivation() {
        let m = model();
        let grid = FieldGrid::for_model(&m, 48, 48, 16);
        // g = x·v = r w c: {g,E} = w² - r φ'(r), even in v.
        let g =
            PerturbationField::from_fn(Arc::clone(&grid), Parity::Odd, |r, w, c| r * w * c)
                .unwrap();
        let br = bracket_with_e(&g, &m).unwrap();
        assert_eq!(br.parity, Parity::Even);
        let mut worst: f64 = 0.0;
        for idx in 0..grid.cells() {
            let (i, j, _) = grid.split(idx);
            let (r, w) = (grid.r(i), grid.w(j));
            let exact = w * w - r * m.dphi().eval(r);
            worst = worst.max((br.values[idx] - exact).abs());
        }
        assert!(worst < 1e-6 * m.u_c(), "worst deviation {worst}");
    }

    #[test]
    fn steady_state_commutes_with_its_energy() {
        let m = model();
        let grid = FieldGrid::for_model(&m, 64, 64, 16);
        // f0 = F(E) is a function of E, so {f0, E} = 0; evaluated through
        // the same stencils as any other field.
        let f0 = PerturbationField::from_fn(Arc::clone(&grid), Parity::Even, |r, w, _| {
            m.f_at_energy(0.5 * w * w + m.phi().eval(r))
        })
        .unwrap();
        let br = bracket_with_e(&f0, &m).unwrap();
        let norm = br.weighted_integral(|_, _, _, v| v * v).sqrt();
        let scale = f0.weighted_integral(|_, _, _, v| v * v).sqrt();
        // The edge |v|² kink of the polytrope limits stencil accuracy there.
        assert!(norm < 5e-2 * scale, "residual norm {norm} vs scale {scale}");
    }

    #[test]
    fn odd_generator_gives_even_mass_free_perturbation() {
        let m = model();
        let grid = FieldGrid::for_model(&m, 64, 64, 16);
        let g = PerturbationField::from_fn(Arc::clone(&grid), Parity::Odd, |r, w, c| {
            let e = 0.5 * w * w + m.phi().eval(r);
            w * c * (-(r / m.support_radius()).powi(2)).exp() * edge_weight(&m, e, 4)
        })
        .unwrap();
        let h = dynamically_accessible(&g, &m).unwrap();
        assert_eq!(h.parity, Parity::Even);
        // Divergence-form integrand: total mass vanishes within the
        // stencil truncation of the support-edge cells.
        let mass = h.integral();
        let scale = h.weighted_integral(|_, _, _, v| v.abs());
        assert!(mass.abs() < 1e-3 * scale, "mass {mass} vs scale {scale}");
    }

    #[test]
    fn energy_functions_are_annihilated() {
        let m = model();
        let grid = FieldGrid::for_model(&m, 64, 64, 16);
        let g = PerturbationField::from_fn(Arc::clone(&grid), Parity::Even, |r, w, _| {
            let e = 0.5 * w * w + m.phi().eval(r);
            edge_weight(&m, e, 4)
        })
        .unwrap();
        let h = dynamically_accessible(&g, &m).unwrap();
        let norm = h.weighted_integral(|_, _, _, v| v * v).sqrt();
        let scale = g.weighted_integral(|_, _, _, v| v * v).sqrt();
        assert!(norm < 5e-3 * scale, "{norm} vs {scale}");
    }

    #[test]
    fn support_violations_are_rejected() {
        let m = model();
        // Grid reaching beyond the support edge in speed.
        let grid = FieldGrid::new(32, 32, 8, m.support_radius(), 1.4 * (2.0 * m.u_c()).sqrt());
        let g = PerturbationField::from_fn(Arc::clone(&grid), Parity::Even, |_, _, _| 1.0)
            .unwrap();
        assert!(matches!(
            dynamically_accessible(&g, &m),
            Err(LinearizedError::InaccessibleSupport)
        ));
    }
}
