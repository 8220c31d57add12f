//! Speed moments of energy laws at a fixed potential value.

use std::f64::consts::PI;

use super::quad::smooth_rule;
use super::RadialError;

/// `∫ F(|v|²/2 + φ) |v|^k dv`, reduced to the one-dimensional integral
/// `4π 2^{(k+1)/2} ∫_φ^{E0} F(E) (E-φ)^{(k+1)/2} dE`.
///
/// The substitution `E = φ + (E0-φ) sin²θ` removes the algebraic edge
/// behaviour at both endpoints, so a fixed Gauss-Legendre rule converges to
/// quadrature accuracy for power-law and exponential-type laws, including
/// their derivatives.
pub fn velocity_moment(
    f: impl Fn(f64) -> f64,
    phi: f64,
    e0: f64,
    k: i32,
) -> Result<f64, RadialError> {
    if k < 0 {
        return Err(RadialError::UnsupportedMoment(k));
    }
    let u = e0 - phi;
    if u <= 0.0 {
        return Ok(0.0);
    }
    let rule = smooth_rule();
    let kf = k as f64;
    let theta_integral = rule.integrate_cells(0.0, 0.5 * PI, 8, |theta| {
        let (s, c) = theta.sin_cos();
        f(phi + u * s * s) * s.powf(kf + 2.0) * c
    });
    Ok(4.0 * PI * 2.0_f64.powf(0.5 * (kf + 1.0)) * 2.0 * u.powf(0.5 * (kf + 3.0)) * theta_integral)
}

/// `-∫ ((x·v)/|x|)² F'(E) dv = -(1/3) ∫ F'(E) |v|² dv`, the parallel-velocity
/// second moment that collapses to the spatial density for a steady law.
pub fn parallel_moment_of_derivative(
    fprime: impl Fn(f64) -> f64,
    phi: f64,
    e0: f64,
) -> Result<f64, RadialError> {
    Ok(-velocity_moment(fprime, phi, e0, 2)? / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_law_matches_ball_volume() {
        // F ≡ 1 below the cutoff: ∫ dv over |v|²/2 < u is (4π/3)(2u)^{3/2}.
        let u = 0.7;
        let v = velocity_moment(|_| 1.0, -u, 0.0, 0).unwrap();
        let exact = 4.0 * PI / 3.0 * (2.0 * u).powf(1.5);
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn empty_support_is_zero() {
        assert_eq!(velocity_moment(|_| 1.0, 0.3, 0.0, 0).unwrap(), 0.0);
        assert_eq!(velocity_moment(|_| 1.0, 0.0, 0.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn king_law_vanishes_continuously_at_cutoff() {
        let e0 = -0.4;
        let king = |e: f64| ((e0 - e).exp() - 1.0).max(0.0);
        let mut prev = f64::INFINITY;
        for i in 1..=6 {
            let phi = e0 - 10.0_f64.powi(-i);
            let v = velocity_moment(king, phi, e0, 0).unwrap();
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn negative_moment_order_rejected() {
        assert!(matches!(
            velocity_moment(|_| 1.0, -1.0, 0.0, -1),
            Err(RadialError::UnsupportedMoment(-1))
        ));
    }

    #[test]
    fn polytrope_density_matches_gamma_formula() {
        // ∫ C (E0-E)^n dv = C 2^{3/2} π^{3/2} Γ(n+1)/Γ(n+5/2) (E0-φ)^{n+3/2}.
        for &n in &[0.5_f64, 1.0, 2.0, 3.0] {
            let u = 0.9;
            let v = velocity_moment(|e: f64| (-e).max(0.0).powf(n), -u, 0.0, 0).unwrap();
            let cn = 2.0_f64.powf(1.5) * PI.powf(1.5) * libm::tgamma(n + 1.0)
                / libm::tgamma(n + 2.5);
            let exact = cn * u.powf(n + 1.5);
            assert!((v - exact).abs() < 1e-10 * exact, "n={n}");
        }
    }

    #[test]
    fn parallel_moment_identity_for_polytrope() {
        // -(1/3)∫F'|v|²dv = ∫F dv by one integration by parts.
        let n = 1.0;
        let u = 0.6;
        let f = |e: f64| (-e).max(0.0).powf(n);
        let fp = |e: f64| if e < 0.0 { -n * (-e).powf(n - 1.0) } else { 0.0 };
        let lhs = parallel_moment_of_derivative(fp, -u, 0.0).unwrap();
        let rhs = velocity_moment(f, -u, 0.0, 0).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * rhs);
    }
}
