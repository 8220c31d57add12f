//! The four-parameter symmetry family `g(x,v) = γ f0((x - x0)/λ, μ v)`.
//!
//! The family is closed under composition and acts on every functional by an
//! explicit power of `(γ, λ, μ)`; the exponents here are the single source
//! of truth used by the functionals module.

use super::EquilibriumModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryParams {
    pub gamma: f64,
    pub lambda: f64,
    pub mu: f64,
    pub shift: [f64; 3],
}

impl Default for SymmetryParams {
    fn default() -> Self {
        SymmetryParams {
            gamma: 1.0,
            lambda: 1.0,
            mu: 1.0,
            shift: [0.0; 3],
        }
    }
}

impl SymmetryParams {
    pub fn is_identity(&self) -> bool {
        self == &SymmetryParams::default()
    }

    /// Composition `self ∘ inner`: applying `inner` to a distribution and
    /// then `self` to the result.
    pub fn compose(&self, inner: &SymmetryParams) -> SymmetryParams {
        SymmetryParams {
            gamma: self.gamma * inner.gamma,
            lambda: self.lambda * inner.lambda,
            mu: self.mu * inner.mu,
            shift: [
                self.shift[0] + self.lambda * inner.shift[0],
                self.shift[1] + self.lambda * inner.shift[1],
                self.shift[2] + self.lambda * inner.shift[2],
            ],
        }
    }
}

/// A steady state composed with a symmetry transformation. All quantities
/// are the base model's values rescaled by exact parameter powers.
#[derive(Debug, Clone, Copy)]
pub struct TransformedModel<'a> {
    pub base: &'a EquilibriumModel,
    pub params: SymmetryParams,
}

/// Transforms a model by `(γ, λ, μ, x0)`. Parameters must be positive.
pub fn symmetry_transform(
    model: &EquilibriumModel,
    gamma: f64,
    lambda: f64,
    mu: f64,
    shift: [f64; 3],
) -> TransformedModel<'_> {
    assert!(gamma > 0.0 && lambda > 0.0 && mu > 0.0);
    TransformedModel {
        base: model,
        params: SymmetryParams {
            gamma,
            lambda,
            mu,
            shift,
        },
    }
}

impl<'a> TransformedModel<'a> {
    pub fn identity(model: &'a EquilibriumModel) -> Self {
        TransformedModel {
            base: model,
            params: SymmetryParams::default(),
        }
    }

    pub fn then(&self, outer: &SymmetryParams) -> TransformedModel<'a> {
        TransformedModel {
            base: self.base,
            params: outer.compose(&self.params),
        }
    }

    /// `M(g) = γ λ³ μ^{-3} M`.
    pub fn mass_factor(&self) -> f64 {
        let p = &self.params;
        p.gamma * p.lambda.powi(3) * p.mu.powi(-3)
    }

    /// Kinetic energy scales as `γ λ³ μ^{-5}`.
    pub fn kinetic_factor(&self) -> f64 {
        let p = &self.params;
        p.gamma * p.lambda.powi(3) * p.mu.powi(-5)
    }

    /// Field energy scales as `γ² λ⁵ μ^{-6}`.
    pub fn potential_factor(&self) -> f64 {
        let p = &self.params;
        p.gamma * p.gamma * p.lambda.powi(5) * p.mu.powi(-6)
    }

    /// `‖g‖_p = γ λ^{3/p} μ^{-3/p} ‖f‖_p`; the limit `p = ∞` is `γ`.
    pub fn lp_factor(&self, p: f64) -> f64 {
        let s = &self.params;
        if p.is_infinite() {
            s.gamma
        } else {
            s.gamma * (s.lambda / s.mu).powf(3.0 / p)
        }
    }

    /// Spatial density scales as `γ μ^{-3}` with radii stretched by `λ`.
    pub fn rho_at(&self, x: [f64; 3]) -> f64 {
        let p = &self.params;
        let r = self.pulled_back_radius(x);
        p.gamma * p.mu.powi(-3) * self.base.rho().eval(r)
    }

    /// Potential scales as `γ λ² μ^{-3}`.
    pub fn phi_at(&self, x: [f64; 3]) -> f64 {
        let p = &self.params;
        let r = self.pulled_back_radius(x);
        p.gamma * p.lambda * p.lambda * p.mu.powi(-3) * self.base.phi().eval(r)
    }

    pub fn f_at(&self, x: [f64; 3], v: [f64; 3]) -> f64 {
        let p = &self.params;
        let y = [
            (x[0] - p.shift[0]) / p.lambda,
            (x[1] - p.shift[1]) / p.lambda,
            (x[2] - p.shift[2]) / p.lambda,
        ];
        let w = [p.mu * v[0], p.mu * v[1], p.mu * v[2]];
        p.gamma * self.base.f_at(y, w)
    }

    pub fn mass(&self) -> f64 {
        self.mass_factor() * self.base.mass()
    }

    /// Support radius of the transformed state.
    pub fn support_radius(&self) -> f64 {
        self.params.lambda * self.base.support_radius()
    }

    fn pulled_back_radius(&self, x: [f64; 3]) -> f64 {
        let p = &self.params;
        let dx = [x[0] - p.shift[0], x[1] - p.shift[1], x[2] - p.shift[2]];
        (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt() / p.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{build_equilibrium, AnsatzLaw};
    use crate::radial::RadialGrid;

    fn model() -> EquilibriumModel {
        let law = AnsatzLaw::polytrope(1.0, 1.0).unwrap();
        build_equilibrium(&law, 1.0, &RadialGrid::uniform(10.0, 256).unwrap()).unwrap()
    }

    #[test]
    fn identity_element_changes_nothing() {
        let m = model();
        let t = TransformedModel::identity(&m);
        assert_eq!(t.mass(), m.mass());
        assert_eq!(t.f_at([0.1, 0.0, 0.0], [0.0, 0.2, 0.0]), m.f_at([0.1, 0.0, 0.0], [0.0, 0.2, 0.0]));
    }

    #[test]
    fn mass_scaling_matches_change_of_variables() {
        let m = model();
        let t = symmetry_transform(&m, 2.0, 1.5, 0.8, [0.0; 3]);
        let expect = 2.0 * 1.5_f64.powi(3) * 0.8_f64.powi(-3) * m.mass();
        assert!((t.mass() - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn composition_is_closed() {
        let m = model();
        let inner = symmetry_transform(&m, 2.0, 0.5, 3.0, [1.0, 0.0, 0.0]);
        let outer = SymmetryParams {
            gamma: 0.5,
            lambda: 4.0,
            mu: 0.25,
            shift: [0.0, 2.0, 0.0],
        };
        let composed = inner.then(&outer);
        let x = [0.3, 1.7, -0.2];
        let v = [0.1, -0.3, 0.2];
        // Apply the outer transform to the inner-transformed distribution
        // by hand and compare pointwise.
        let y = [(x[0] - 0.0) / 4.0, (x[1] - 2.0) / 4.0, (x[2] - 0.0) / 4.0];
        let w = [0.25 * v[0], 0.25 * v[1], 0.25 * v[2]];
        let direct = 0.5 * inner.f_at(y, w);
        assert!((composed.f_at(x, v) - direct).abs() < 1e-14);
    }
}
