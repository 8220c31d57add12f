//! Shooting construction of self-consistent steady states.
//!
//! The elliptic equation `(1/r²)(r²φ')' = ρ(φ)` is integrated in the shifted
//! variable `u = E0 - φ`, which turns the cutoff into an output: starting
//! from a central depth `u_c` with `u'(0) = 0`, the solution is marched
//! outward until its first zero `u(R) = 0`. Exterior matching then fixes the
//! mass `M = -4πR²u'(R)` and the cutoff `E0 = -M/(4πR) = R u'(R)`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::law::AnsatzLaw;
use super::BuildError;
use crate::radial::{
    integrate_radial, velocity_moment, Extrapolation, RadialGrid, RadialProfile,
};

/// A built steady state: the law, its cutoff, the self-consistent profiles
/// and the global scalars.
#[derive(Debug, Clone)]
pub struct EquilibriumModel {
    law: AnsatzLaw,
    e0: f64,
    u_c: f64,
    phi: RadialProfile,
    rho: RadialProfile,
    dphi: RadialProfile,
    mass: f64,
    support_radius: f64,
}

impl EquilibriumModel {
    pub fn law(&self) -> &AnsatzLaw {
        &self.law
    }

    /// Cutoff energy `E0 < 0`; `F(E) = 0` for `E >= E0`.
    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// Central depth `E0 - φ(0)`.
    pub fn u_c(&self) -> f64 {
        self.u_c
    }

    pub fn phi(&self) -> &RadialProfile {
        &self.phi
    }

    pub fn rho(&self) -> &RadialProfile {
        &self.rho
    }

    pub fn dphi(&self) -> &RadialProfile {
        &self.dphi
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Central potential `φ(0) = E0 - u_c`.
    pub fn phi_c(&self) -> f64 {
        self.e0 - self.u_c
    }

    /// `F(E)`.
    pub fn f_at_energy(&self, e: f64) -> f64 {
        self.law.f_of_depth(self.e0 - e)
    }

    /// `F'(E)`; negative on `(-∞, E0)`, zero beyond.
    pub fn fprime_at_energy(&self, e: f64) -> f64 {
        self.law.fprime_of_depth(self.e0 - e)
    }

    /// Phase-space density at a position and velocity.
    pub fn f_at(&self, x: [f64; 3], v: [f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let w2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        self.f_at_energy(0.5 * w2 + self.phi.eval(r))
    }

    /// Maximum of the distribution, attained at the centre.
    pub fn f_max(&self) -> f64 {
        self.law.f_of_depth(self.u_c)
    }

    /// Local depth `E0 - φ(r)`, clamped to zero outside the support.
    pub fn depth_at(&self, r: f64) -> f64 {
        if r >= self.support_radius {
            0.0
        } else {
            (self.e0 - self.phi.eval(r)).max(0.0)
        }
    }

    /// Escape speed bound `√(2(E0 - φ(r)))` of the populated region.
    pub fn speed_bound(&self, r: f64) -> f64 {
        (2.0 * self.depth_at(r)).sqrt()
    }

    /// Circular-orbit period at the support edge, the natural time unit.
    pub fn dynamical_time(&self) -> f64 {
        2.0 * PI * (4.0 * PI * self.support_radius.powi(3) / self.mass).sqrt()
    }

    /// Self-consistency: the stored density against the velocity integral of
    /// the stored law and potential. Returns the worst relative deviation
    /// over the inner 99% of the support and over the outer 1%.
    pub fn self_consistency_residual(&self) -> (f64, f64) {
        let rho_c = self.rho.values()[0];
        let mut inner: f64 = 0.0;
        let mut outer: f64 = 0.0;
        for (&r, &rho) in self
            .rho
            .grid()
            .nodes()
            .iter()
            .zip(self.rho.values())
        {
            let direct =
                velocity_moment(|e| self.f_at_energy(e), self.phi.eval(r), self.e0, 0).unwrap();
            let dev = (rho - direct).abs() / rho_c;
            if r <= 0.99 * self.support_radius {
                inner = inner.max(dev);
            } else {
                outer = outer.max(dev);
            }
        }
        (inner, outer)
    }

    /// Worst relative residual of `(1/r²)(r²φ')' = ρ` on interior nodes,
    /// split as in [`Self::self_consistency_residual`].
    pub fn pde_residual(&self) -> (f64, f64) {
        let nodes = self.dphi.grid().nodes();
        let d = self.dphi.values();
        let dd = crate::radial::numdiff::derivative_on_grid(nodes, d);
        let rho_c = self.rho.values()[0];
        let mut inner: f64 = 0.0;
        let mut outer: f64 = 0.0;
        for k in 1..nodes.len() - 1 {
            let res = (dd[k] + 2.0 * d[k] / nodes[k] - self.rho.values()[k]).abs() / rho_c;
            if nodes[k] <= 0.99 * self.support_radius {
                inner = inner.max(res);
            } else {
                outer = outer.max(res);
            }
        }
        (inner, outer)
    }

    /// Cumulative mass inside radius `r`, from `m(r) = 4π r² φ'(r)`.
    pub fn mass_within(&self, r: f64) -> f64 {
        if r >= self.support_radius {
            self.mass
        } else {
            4.0 * PI * r * r * self.dphi.eval(r)
        }
    }

    /// Kinetic part of the Hamiltonian, `∫ |v|²/2 f dx dv`, by quadrature.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * integrate_radial(&self.rho, |r| {
            if self.rho.eval(r) <= 0.0 {
                return 0.0;
            }
            velocity_moment(|e| self.f_at_energy(e), self.phi.eval(r), self.e0, 2).unwrap()
                / self.rho.eval(r)
        })
        .unwrap()
    }

    /// Field part of the Hamiltonian, `½ ∫ |∇φ|²`, including the exterior
    /// tail `M²/(8π R)`.
    pub fn potential_energy(&self) -> f64 {
        let interior = integrate_radial(&self.dphi, |r| 0.5 * self.dphi.eval(r)).unwrap();
        let tail = self.mass * self.mass / (8.0 * PI * self.support_radius);
        interior + tail
    }

    /// `H = H_cin - H_pot`.
    pub fn hamiltonian(&self) -> f64 {
        self.kinetic_energy() - self.potential_energy()
    }
}

impl EquilibriumModel {
    /// Reassembles a model from previously persisted parts.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        law: AnsatzLaw,
        e0: f64,
        u_c: f64,
        phi: RadialProfile,
        rho: RadialProfile,
        dphi: RadialProfile,
        mass: f64,
        support_radius: f64,
    ) -> Result<Self, BuildError> {
        if !(mass > 0.0 && support_radius > 0.0 && e0 < 0.0 && u_c > 0.0) {
            return Err(BuildError::Io("inconsistent model scalars".into()));
        }
        Ok(EquilibriumModel {
            law,
            e0,
            u_c,
            phi,
            rho,
            dphi,
            mass,
            support_radius,
        })
    }
}

/// Accepted sample of the outward integration, exposed when the support does
/// not close within the grid.
#[derive(Debug, Clone)]
pub struct PartialShot {
    pub radii: Vec<f64>,
    pub depth: Vec<f64>,
}

const RK_SAFETY: f64 = 0.9;
const RK_RTOL: f64 = 1e-12;

/// Builds a steady state from a law and a central depth. The grid argument
/// fixes the search budget (its extent) and the resolution (its node count);
/// the model profiles are sampled on an edge-refined grid over `[0, R]`.
pub fn build_equilibrium(
    law: &AnsatzLaw,
    u_c: f64,
    grid: &RadialGrid,
) -> Result<EquilibriumModel, BuildError> {
    if !(u_c > 0.0) || !u_c.is_finite() {
        return Err(BuildError::BadCentralDepth(u_c));
    }
    let rho_c = law.density_of_depth(u_c);
    if !(rho_c > 0.0) {
        return Err(BuildError::InvalidLaw(
            "law has zero density at the central depth".into(),
        ));
    }
    let scale = (u_c / rho_c).sqrt();
    let r_budget = grid.r_max();
    let max_h = (scale / 16.0).min(r_budget / 64.0);

    // Pass 1: locate the support edge.
    let mut samples = vec![(0.0, u_c, 0.0)];
    let (mut r, mut u, mut p) = series_start(law, u_c, 1e-6 * scale);
    samples.push((r, u, p));
    let mut h = 1e-3 * scale;
    let mut crossing: Option<((f64, f64, f64), f64)> = None;
    while r < r_budget {
        h = h.min(max_h).min(r_budget - r);
        let (r1, u1, p1, h_next) = match rk45_step(law, r, u, p, h, u_c) {
            Some(step) => step,
            None => {
                h *= 0.5;
                if h < 1e-15 * scale {
                    return Err(BuildError::StepUnderflow);
                }
                continue;
            }
        };
        if u1 <= 0.0 {
            crossing = Some(((r, u, p), r1));
            break;
        }
        r = r1;
        u = u1;
        p = p1;
        samples.push((r, u, p));
        h = h_next;
    }

    let Some(((r_lo, u_lo, p_lo), r_hi)) = crossing else {
        return Err(BuildError::NonCompactSupport(PartialShot {
            radii: samples.iter().map(|s| s.0).collect(),
            depth: samples.iter().map(|s| s.1).collect(),
        }));
    };

    // Bisection on the crossing bracket, re-integrating from the last
    // accepted state with fixed fine steps.
    let (mut a, mut ua, mut pa) = (r_lo, u_lo, p_lo);
    let mut b = r_hi;
    while b - a > 1e-13 * b.max(1.0) {
        let mid = 0.5 * (a + b);
        let (um, pm) = rk4_span(law, a, ua, pa, mid, 16);
        if um > 0.0 {
            a = mid;
            ua = um;
            pa = pm;
        } else {
            b = mid;
        }
    }
    let support_radius = 0.5 * (a + b);
    let (_, p_edge) = rk4_span(law, a, ua, pa, support_radius, 4);
    let mass = -4.0 * PI * support_radius * support_radius * p_edge;
    let e0 = support_radius * p_edge;
    if !(mass > 0.0 && e0 < 0.0) {
        return Err(BuildError::InvalidLaw(format!(
            "degenerate edge state: M = {mass}, E0 = {e0}"
        )));
    }

    // Pass 2: march again with forced stops on the final grid nodes.
    let final_grid = Arc::new(RadialGrid::edge_refined(support_radius, grid.len())?);
    let nodes = final_grid.nodes();
    let mut u_vals = vec![0.0; nodes.len()];
    let mut p_vals = vec![0.0; nodes.len()];
    u_vals[0] = u_c;
    let (mut r, mut u, mut p) = series_start(law, u_c, (1e-6 * scale).min(0.5 * nodes[1]));
    let mut h = 1e-3 * scale;
    for (k, &target) in nodes.iter().enumerate().skip(1) {
        while r < target {
            let trial = h.min(max_h).min(target - r);
            match rk45_step(law, r, u, p, trial, u_c) {
                Some((r1, u1, p1, h_next)) => {
                    r = r1;
                    u = u1;
                    p = p1;
                    h = h_next;
                }
                None => {
                    h = trial * 0.5;
                    if h < 1e-15 * scale {
                        return Err(BuildError::StepUnderflow);
                    }
                }
            }
        }
        u_vals[k] = u.max(0.0);
        p_vals[k] = p;
    }
    let n = nodes.len();
    u_vals[n - 1] = 0.0;
    p_vals[n - 1] = p_edge;

    let phi = RadialProfile::new(
        Arc::clone(&final_grid),
        u_vals.iter().map(|&u| e0 - u).collect(),
        Extrapolation::CoefOverR(-mass / (4.0 * PI)),
    )?;
    let rho = RadialProfile::new(
        Arc::clone(&final_grid),
        u_vals.iter().map(|&u| law.density_of_depth(u)).collect(),
        Extrapolation::Zero,
    )?;
    let mut dphi_vals: Vec<f64> = p_vals.iter().map(|&p| -p).collect();
    dphi_vals[0] = 0.0;
    let dphi = RadialProfile::new(
        final_grid,
        dphi_vals,
        Extrapolation::CoefOverR2(mass / (4.0 * PI)),
    )?;

    Ok(EquilibriumModel {
        law: law.clone(),
        e0,
        u_c,
        phi,
        rho,
        dphi,
        mass,
        support_radius,
    })
}

/// Series solution `u = u_c - ρ_c r²/6 + ρ_c ρ'_c r⁴/120` through the
/// coordinate singularity at the origin.
fn series_start(law: &AnsatzLaw, u_c: f64, r0: f64) -> (f64, f64, f64) {
    let rho_c = law.density_of_depth(u_c);
    let slope_c = law.density_slope_of_depth(u_c);
    let u = u_c - rho_c * r0 * r0 / 6.0 + rho_c * slope_c * r0.powi(4) / 120.0;
    let p = -rho_c * r0 / 3.0 + rho_c * slope_c * r0.powi(3) / 30.0;
    (r0, u, p)
}

fn rhs(law: &AnsatzLaw, r: f64, u: f64, p: f64) -> (f64, f64) {
    (p, -law.density_of_depth(u) - 2.0 * p / r)
}

/// One adaptive Dormand-Prince 5(4) step. Returns `None` on rejection.
#[allow(clippy::too_many_arguments)]
fn rk45_step(
    law: &AnsatzLaw,
    r: f64,
    u: f64,
    p: f64,
    h: f64,
    u_scale: f64,
) -> Option<(f64, f64, f64, f64)> {
    const A: [[f64; 6]; 6] = [
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut ku = [0.0; 7];
    let mut kp = [0.0; 7];
    let (du, dp) = rhs(law, r, u, p);
    ku[0] = du;
    kp[0] = dp;
    for s in 0..6 {
        let mut us = u;
        let mut ps = p;
        for j in 0..=s {
            us += h * A[s][j] * ku[j];
            ps += h * A[s][j] * kp[j];
        }
        let (du, dp) = rhs(law, r + C[s] * h, us, ps);
        ku[s + 1] = du;
        kp[s + 1] = dp;
    }
    // 5th-order solution is stage 7's base point (FSAL layout).
    let mut u5 = u;
    let mut p5 = p;
    for j in 0..6 {
        u5 += h * A[5][j] * ku[j];
        p5 += h * A[5][j] * kp[j];
    }
    let mut u4 = u;
    let mut p4 = p;
    for j in 0..7 {
        u4 += h * B4[j] * ku[j];
        p4 += h * B4[j] * kp[j];
    }
    let tol_u = 1e-10 * u_scale + RK_RTOL * u5.abs();
    let tol_p = 1e-10 * u_scale + RK_RTOL * p5.abs();
    let err = ((u5 - u4) / tol_u).hypot((p5 - p4) / tol_p) / 2.0_f64.sqrt();
    if err > 1.0 {
        return None;
    }
    let factor = (RK_SAFETY * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    Some((r + h, u5, p5, h * factor))
}

/// Fixed-step classical RK4 from `(r0, u0, p0)` to `r1`.
fn rk4_span(law: &AnsatzLaw, r0: f64, u0: f64, p0: f64, r1: f64, steps: usize) -> (f64, f64) {
    let h = (r1 - r0) / steps as f64;
    let (mut u, mut p) = (u0, p0);
    let mut r = r0;
    for _ in 0..steps {
        let (k1u, k1p) = rhs(law, r, u, p);
        let (k2u, k2p) = rhs(law, r + 0.5 * h, u + 0.5 * h * k1u, p + 0.5 * h * k1p);
        let (k3u, k3p) = rhs(law, r + 0.5 * h, u + 0.5 * h * k2u, p + 0.5 * h * k2p);
        let (k4u, k4p) = rhs(law, r + h, u + h * k3u, p + h * k3p);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += h;
    }
    (u, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::DEFAULT_GRID_NODES;

    fn budget_grid(r_max: f64) -> RadialGrid {
        RadialGrid::uniform(r_max, DEFAULT_GRID_NODES).unwrap()
    }

    #[test]
    fn polytrope_n1_is_self_consistent() {
        let law = AnsatzLaw::polytrope(1.0, 1.0).unwrap();
        let model = build_equilibrium(&law, 1.0, &budget_grid(10.0)).unwrap();
        let (inner, outer) = model.self_consistency_residual();
        assert!(inner < 1e-6, "inner residual {inner}");
        assert!(outer < 1e-4, "outer residual {outer}");
        // Exterior matching is exact by construction.
        assert!(
            (model.e0() + model.mass() / (4.0 * PI * model.support_radius())).abs()
                <= 1e-12 * model.e0().abs()
        );
        assert!(model.phi_c() < model.e0() && model.e0() < 0.0);
    }

    #[test]
    fn polytrope_n0_density_shape() {
        // ρ(r) ∝ (E0 - φ(r))^{3/2} with the Γ-formula constant.
        let law = AnsatzLaw::polytrope(0.0, 1.0).unwrap();
        let model = build_equilibrium(&law, 1.0, &budget_grid(10.0)).unwrap();
        let c0 = crate::equilibrium::polytrope_density_constant(0.0, 1.0).unwrap();
        for (&r, &rho) in model
            .rho()
            .grid()
            .nodes()
            .iter()
            .zip(model.rho().values())
        {
            let u = (model.e0() - model.phi().eval(r)).max(0.0);
            assert!((rho - c0 * u.powf(1.5)).abs() < 1e-6 * model.rho().values()[0], "r={r}");
        }
    }

    #[test]
    fn edge_slope_determines_mass() {
        // M must equal the volume integral of the density (independent
        // trapezoidal sum), not just the edge slope it was derived from.
        let law = AnsatzLaw::polytrope(1.5, 0.7).unwrap();
        let model = build_equilibrium(&law, 1.2, &budget_grid(10.0)).unwrap();
        let nodes = model.rho().grid().nodes();
        let vals = model.rho().values();
        let mut trapeze = 0.0;
        for k in 0..nodes.len() - 1 {
            let f0 = nodes[k] * nodes[k] * vals[k];
            let f1 = nodes[k + 1] * nodes[k + 1] * vals[k + 1];
            trapeze += 0.5 * (f0 + f1) * (nodes[k + 1] - nodes[k]);
        }
        let m_trapeze = 4.0 * PI * trapeze;
        assert!(
            (m_trapeze - model.mass()).abs() < 1e-5 * model.mass(),
            "trapeze {m_trapeze} vs mass {}",
            model.mass()
        );
    }

    #[test]
    fn king_model_builds_with_decreasing_density() {
        let model = build_equilibrium(&AnsatzLaw::King, 1.0, &budget_grid(20.0)).unwrap();
        let rho = model.rho().values();
        assert!(rho.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        assert_eq!(*rho.last().unwrap(), 0.0);
        let (inner, outer) = model.self_consistency_residual();
        assert!(inner < 1e-6 && outer < 1e-4, "({inner}, {outer})");
    }

    #[test]
    fn plummer_case_reports_non_compact_support() {
        let law = AnsatzLaw::polytrope(3.5, 1.0).unwrap();
        let err = build_equilibrium(&law, 1.0, &budget_grid(12.0)).unwrap_err();
        match err {
            BuildError::NonCompactSupport(partial) => {
                // Scaled solution θ(ξ) = u(αξ)/u_c matches (1+ξ²/3)^{-1/2}.
                let c = crate::equilibrium::polytrope_density_constant(3.5, 1.0).unwrap();
                let alpha = 1.0 / c.sqrt();
                let interp = |r: f64| -> f64 {
                    let k = partial.radii.partition_point(|&x| x <= r) - 1;
                    let t = (r - partial.radii[k]) / (partial.radii[k + 1] - partial.radii[k]);
                    partial.depth[k] + t * (partial.depth[k + 1] - partial.depth[k])
                };
                for i in 1..100 {
                    let xi = 10.0 * i as f64 / 100.0;
                    let theta = (1.0 + xi * xi / 3.0).powf(-0.5);
                    let got = interp(alpha * xi);
                    // Linear interpolation of the dense samples dominates
                    // the comparison error here; the acceptance suite holds
                    // the 1e-6 bound with shape-preserving interpolation.
                    assert!((got - theta).abs() < 1e-4, "xi={xi}");
                }
            }
            other => panic!("expected NonCompactSupport, got {other:?}"),
        }
    }

    #[test]
    fn tabulated_law_reproduces_its_parent_model() {
        // Tabulate the King law on a fine depth grid and rebuild: the
        // tabulated route goes through the velocity-moment quadrature for
        // its density, so it cross-checks the closed forms end to end.
        let king = build_equilibrium(&AnsatzLaw::King, 1.0, &budget_grid(20.0)).unwrap();
        let depths: Vec<f64> = (0..=400).map(|k| 1.2 * k as f64 / 400.0).collect();
        let values: Vec<f64> = depths.iter().map(|&d| AnsatzLaw::King.f_of_depth(d)).collect();
        let law = AnsatzLaw::tabulated(depths, values).unwrap();
        let model = build_equilibrium(&law, 1.0, &budget_grid(20.0)).unwrap();
        assert!(
            (model.support_radius() - king.support_radius()).abs()
                < 2e-3 * king.support_radius(),
            "R {} vs {}",
            model.support_radius(),
            king.support_radius()
        );
        assert!((model.mass() - king.mass()).abs() < 2e-3 * king.mass());
        // Self-consistency still holds (linear interpolation of the law
        // limits the residual floor).
        let (inner, outer) = model.self_consistency_residual();
        assert!(inner < 1e-4 && outer < 1e-3, "({inner}, {outer})");
    }

    #[test]
    fn rejects_bad_central_depth() {
        let law = AnsatzLaw::polytrope(1.0, 1.0).unwrap();
        assert!(matches!(
            build_equilibrium(&law, -1.0, &budget_grid(10.0)),
            Err(BuildError::BadCentralDepth(_))
        ));
    }

    #[test]
    fn mass_within_is_consistent() {
        let law = AnsatzLaw::polytrope(2.0, 1.0).unwrap();
        let model = build_equilibrium(&law, 1.0, &budget_grid(10.0)).unwrap();
        let m_half = model.mass_within(0.5 * model.support_radius());
        let direct = integrate_radial(model.rho(), |r| {
            if r <= 0.5 * model.support_radius() {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((m_half - direct).abs() < 1e-4 * model.mass());
        assert!((model.mass_within(model.support_radius()) - model.mass()).abs() < 1e-12);
    }
}
