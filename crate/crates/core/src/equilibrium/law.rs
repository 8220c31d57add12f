//! Ansatz laws `F(E)` for isotropic spherical steady states.
//!
//! Both built-in families depend on the energy only through the depth
//! `s = E0 - E` below the cutoff, which is why the cutoff can be left
//! undetermined until a model is built.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::radial::{velocity_moment, Direction, MonotoneMap};

use super::BuildError;

/// Largest polytropic index with compact support.
pub const POLYTROPE_N_MAX: f64 = 3.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnsatzLaw {
    /// `F(E) = C_F (E0 - E)_+^n`.
    Polytrope { n: f64, c_f: f64 },
    /// `F(E) = (e^{E0 - E} - 1)_+`.
    King,
    /// `F` tabulated against the depth `E0 - E`; re-checked for monotonicity
    /// with ties flattened, since the stability theory needs `F' < 0` on the
    /// support.
    Tabulated { depth: Vec<f64>, values: Vec<f64> },
}

impl AnsatzLaw {
    pub fn polytrope(n: f64, c_f: f64) -> Result<Self, BuildError> {
        if !(n > -0.5 && n <= POLYTROPE_N_MAX) || !n.is_finite() {
            return Err(BuildError::InvalidLaw(format!(
                "polytropic index n = {n} outside (-1/2, {POLYTROPE_N_MAX}]"
            )));
        }
        if !(c_f > 0.0) || !c_f.is_finite() {
            return Err(BuildError::InvalidLaw(format!("C_F = {c_f} must be positive")));
        }
        Ok(AnsatzLaw::Polytrope { n, c_f })
    }

    pub fn tabulated(depth: Vec<f64>, values: Vec<f64>) -> Result<Self, BuildError> {
        let map = MonotoneMap::new_flattened(depth, values, Direction::Increasing)
            .map_err(|e| BuildError::InvalidLaw(e.to_string()))?;
        if map.breakpoints()[0] != 0.0 || map.values()[0] != 0.0 {
            return Err(BuildError::InvalidLaw(
                "tabulated law must start at depth 0 with value 0".into(),
            ));
        }
        Ok(AnsatzLaw::Tabulated {
            depth: map.breakpoints().to_vec(),
            values: map.values().to_vec(),
        })
    }

    /// `F` as a function of the depth `s = E0 - E`; zero for `s <= 0`.
    pub fn f_of_depth(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            AnsatzLaw::Polytrope { n, c_f } => c_f * s.powf(*n),
            AnsatzLaw::King => s.exp_m1(),
            AnsatzLaw::Tabulated { depth, values } => interp(depth, values, s),
        }
    }

    /// `F'(E)` expressed through the depth: negative on the support, zero
    /// beyond. Polytropes with `n < 1` are unbounded at the cutoff;
    /// consumers integrate them in the energy variable with an edge
    /// substitution.
    pub fn fprime_of_depth(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            AnsatzLaw::Polytrope { n, c_f } => -n * c_f * s.powf(n - 1.0),
            AnsatzLaw::King => -s.exp(),
            AnsatzLaw::Tabulated { depth, values } => {
                let k = depth.partition_point(|&d| d <= s).clamp(1, depth.len() - 1);
                -(values[k] - values[k - 1]) / (depth[k] - depth[k - 1])
            }
        }
    }

    /// Spatial density `ρ(u) = ∫ F(|v|²/2 - u) dv` at local depth
    /// `u = E0 - φ`. Closed forms for the built-in families, quadrature for
    /// tabulated laws.
    pub fn density_of_depth(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match self {
            AnsatzLaw::Polytrope { n, c_f } => {
                polytrope_density_constant(*n, *c_f).unwrap() * u.powf(n + 1.5)
            }
            AnsatzLaw::King => 4.0 * PI * 2.0_f64.sqrt() * king_series(u, 2),
            AnsatzLaw::Tabulated { .. } => {
                velocity_moment(|e| self.f_of_depth(-e), -u, 0.0, 0).unwrap()
            }
        }
    }

    /// `dρ/du = -∫ F'(E) dv`, the effective potential of the linearized
    /// problem evaluated at depth `u`.
    pub fn density_slope_of_depth(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match self {
            AnsatzLaw::Polytrope { n, c_f } => {
                polytrope_density_constant(*n, *c_f).unwrap() * (n + 1.5) * u.powf(n + 0.5)
            }
            AnsatzLaw::King => 4.0 * PI * 2.0_f64.sqrt() * king_series(u, 1),
            AnsatzLaw::Tabulated { .. } => {
                velocity_moment(|e| -self.fprime_of_depth(-e), -u, 0.0, 0).unwrap()
            }
        }
    }

    /// True when `F' < 0` holds strictly on the support (the hypothesis of
    /// the stability theory). The `n = 0` polytrope is the one built-in
    /// family that fails it.
    pub fn strictly_decreasing(&self) -> bool {
        match self {
            AnsatzLaw::Polytrope { n, .. } => *n > 0.0,
            AnsatzLaw::King => true,
            AnsatzLaw::Tabulated { values, .. } => values.windows(2).all(|w| w[1] > w[0]),
        }
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + t * (ys[k + 1] - ys[k])
}

/// Density constant `c_n` with `ρ = c_n (E0 - φ)_+^{n+3/2}` for the
/// polytrope: `C_F · 2^{3/2} π^{3/2} Γ(n+1) / Γ(n+5/2)`, validated against
/// the brute-force velocity integral in the tests.
pub fn polytrope_density_constant(n: f64, c_f: f64) -> Result<f64, BuildError> {
    if n <= -1.0 {
        return Err(BuildError::InvalidLaw(format!(
            "density constant diverges for n = {n} <= -1"
        )));
    }
    Ok(c_f * 2.0_f64.powf(1.5) * PI.powf(1.5) * libm::tgamma(n + 1.0) / libm::tgamma(n + 2.5))
}

/// `Σ_{m>=m0} 2^m u^{m+1/2} / (2m+1)!!`.
///
/// With `m0 = 0` this equals `(√π/2) e^u erf(√u)`; dropping the leading
/// terms gives the King density (`m0 = 2`) and its depth derivative
/// (`m0 = 1`) without any cancellation at small depth.
fn king_series(u: f64, m0: usize) -> f64 {
    let mut term = u.sqrt();
    for m in 0..m0 {
        term *= 2.0 * u / (2.0 * m as f64 + 3.0);
    }
    let mut sum = term;
    let mut m = m0;
    loop {
        term *= 2.0 * u / (2.0 * m as f64 + 3.0);
        sum += term;
        m += 1;
        if term < 1e-18 * sum || m > 400 {
            return sum;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_constant_examples() {
        // n = 0: (4π/3)·2^{3/2}.
        let c0 = polytrope_density_constant(0.0, 1.0).unwrap();
        assert!((c0 - 4.0 * PI / 3.0 * 2.0_f64.powf(1.5)).abs() < 1e-12);
        // n = 1: 2^{3/2} π^{3/2} Γ(2)/Γ(7/2).
        let c1 = polytrope_density_constant(1.0, 1.0).unwrap();
        let gamma72 = 15.0 * PI.sqrt() / 8.0;
        assert!((c1 - 2.0_f64.powf(1.5) * PI.powf(1.5) / gamma72).abs() < 1e-12);
        assert!((c1 - 4.7391).abs() < 1e-4);
        // Linear in C_F; zero amplitude gives zero.
        assert_eq!(polytrope_density_constant(2.0, 0.0).unwrap(), 0.0);
        assert!(polytrope_density_constant(-1.5, 1.0).is_err());
    }

    #[test]
    fn density_constant_matches_velocity_quadrature() {
        for &n in &[0.25_f64, 0.5, 1.0, 1.7, 2.0, 3.0, 3.5] {
            let cn = polytrope_density_constant(n, 1.3).unwrap();
            let u = 0.8;
            let direct = velocity_moment(|e: f64| 1.3 * (-e).max(0.0).powf(n), -u, 0.0, 0).unwrap();
            assert!(
                (cn * u.powf(n + 1.5) - direct).abs() < 1e-9 * direct,
                "n={n}"
            );
        }
    }

    #[test]
    fn king_evaluations() {
        let law = AnsatzLaw::King;
        assert_eq!(law.f_of_depth(0.0), 0.0);
        assert!((law.f_of_depth(1.0) - (1.0_f64.exp() - 1.0)).abs() < 1e-15);
        assert!((law.fprime_of_depth(1.0) + 1.0_f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn king_density_matches_erf_closed_form_and_quadrature() {
        let law = AnsatzLaw::King;
        for &u in &[1e-6, 1e-3, 0.1, 1.0, 3.0, 12.0] {
            let series = law.density_of_depth(u);
            let erf_form = 4.0
                * PI
                * 2.0_f64.sqrt()
                * ((PI.sqrt() / 2.0) * u.exp() * libm::erf(u.sqrt())
                    - u.sqrt()
                    - 2.0 / 3.0 * u.powf(1.5));
            let quad = velocity_moment(|e| law.f_of_depth(-e), -u, 0.0, 0).unwrap();
            if u >= 0.1 {
                assert!((series - erf_form).abs() < 1e-9 * series, "u={u}");
            }
            assert!((series - quad).abs() < 1e-8 * series.max(1e-30), "u={u}");
        }
    }

    #[test]
    fn king_density_slope_is_derivative() {
        let law = AnsatzLaw::King;
        for &u in &[0.3_f64, 1.0, 2.5] {
            let h = 1e-6;
            let fd = (law.density_of_depth(u + h) - law.density_of_depth(u - h)) / (2.0 * h);
            assert!((law.density_slope_of_depth(u) - fd).abs() < 1e-6 * fd.abs());
        }
    }

    #[test]
    fn polytrope_eval_examples() {
        let law = AnsatzLaw::polytrope(1.0, 1.0).unwrap();
        // Linear law at depth 1/2.
        assert_eq!(law.f_of_depth(0.5), 0.5);
        assert_eq!(law.fprime_of_depth(0.5), -1.0);
        assert_eq!(law.f_of_depth(-1.0), 0.0);
    }

    #[test]
    fn tabulated_law_is_flattened_and_interpolated() {
        let law = AnsatzLaw::tabulated(
            vec![0.0, 0.5, 1.0, 1.5],
            vec![0.0, 0.4, 0.3, 1.0],
        )
        .unwrap();
        // The dip at depth 1.0 is flattened to 0.4.
        assert_eq!(law.f_of_depth(1.0), 0.4);
        assert!(!law.strictly_decreasing());
        assert!((law.f_of_depth(0.25) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn law_validation() {
        assert!(AnsatzLaw::polytrope(3.6, 1.0).is_err());
        assert!(AnsatzLaw::polytrope(-0.5, 1.0).is_err());
        assert!(AnsatzLaw::polytrope(1.0, 0.0).is_err());
        assert!(AnsatzLaw::polytrope(3.5, 1.0).is_ok());
    }
}
