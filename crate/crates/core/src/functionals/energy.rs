//! Spatial densities and the conserved energy bookkeeping
//! `H = H_cin - H_pot`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::casimir::lp_norm;
use super::view::DistributionView;
use super::FunctionalsError;
use crate::exec;
use crate::radial::{
    integrate_radial, solve_radial_field, Extrapolation, RadialGrid, RadialProfile,
};

/// Energy and norm summary of a distribution.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub h_cin: f64,
    pub h_pot: f64,
    pub hamiltonian: f64,
    pub mass: f64,
    /// Keys "1", "2", "inf".
    pub lp_norms: BTreeMap<String, f64>,
}

/// Radial density `ρ_f(r) = ∫ f dv` on the given grid. Ensembles are
/// shell-binned about the origin (node-centered shells); analytic views are
/// evaluated through their scaling laws.
pub fn spatial_density(
    f: &DistributionView,
    grid: &Arc<RadialGrid>,
) -> Result<RadialProfile, FunctionalsError> {
    match f {
        DistributionView::Analytic(tm) => Ok(RadialProfile::from_fn(
            Arc::clone(grid),
            Extrapolation::Zero,
            |r| tm.rho_at([r, 0.0, 0.0]),
        )?),
        DistributionView::Ensemble { particles, .. } => {
            let nodes = grid.nodes();
            let n = nodes.len();
            // Node-centered shells: shell k spans the midpoints around node k.
            let mut edges = Vec::with_capacity(n + 1);
            edges.push(0.0);
            for k in 0..n - 1 {
                edges.push(0.5 * (nodes[k] + nodes[k + 1]));
            }
            edges.push(nodes[n - 1]);
            let radii: Vec<f64> = (0..particles.len()).map(|i| particles.radius(i)).collect();
            let items: Vec<(f64, f64)> = radii
                .iter()
                .zip(&particles.weights)
                .map(|(&r, &w)| (r, w))
                .collect();
            let hist = exec::histogram(&items, n, |&(r, w)| {
                if r >= *edges.last().unwrap() {
                    return None;
                }
                let k = edges.partition_point(|&e| e <= r) - 1;
                Some((k.min(n - 1), w))
            });
            let values: Vec<f64> = hist
                .iter()
                .enumerate()
                .map(|(k, &m)| {
                    let vol = 4.0 * PI / 3.0 * (edges[k + 1].powi(3) - edges[k].powi(3));
                    if vol > 0.0 {
                        m / vol
                    } else {
                        0.0
                    }
                })
                .collect();
            Ok(RadialProfile::new(
                Arc::clone(grid),
                values,
                Extrapolation::Zero,
            )?)
        }
        DistributionView::Gridded(g) => {
            let rho_cells = g.radial_density();
            // Profile on the cell-center radii, extended to r = 0 and r_max.
            let mut nodes = Vec::with_capacity(g.grid.n_r + 2);
            let mut values = Vec::with_capacity(g.grid.n_r + 2);
            nodes.push(0.0);
            values.push(rho_cells[0]);
            for i in 0..g.grid.n_r {
                nodes.push(g.grid.r_center(i));
                values.push(rho_cells[i]);
            }
            nodes.push(g.grid.r_max);
            values.push(*rho_cells.last().unwrap());
            let cell_grid = Arc::new(RadialGrid::new(nodes)?);
            let on_cells = RadialProfile::new(cell_grid, values, Extrapolation::Zero)?;
            Ok(RadialProfile::from_fn(
                Arc::clone(grid),
                Extrapolation::Zero,
                |r| on_cells.eval(r),
            )?)
        }
    }
}

/// Field energy `½∫|∇φ_f|²` computed as `-½∫φ_f ρ_f dx`, which equals the
/// full-space gradient integral exactly (the boundary term reproduces the
/// exterior tail).
pub fn potential_energy_of_density(rho: &RadialProfile) -> Result<f64, FunctionalsError> {
    let sol = solve_radial_field(rho)?;
    Ok(-0.5 * integrate_radial(rho, |r| sol.phi.eval(r))?)
}

/// Default radial grid for binning an ensemble's density.
pub fn binning_grid(e: &crate::dynamics::ParticleEnsemble, fallback_r: f64) -> Arc<RadialGrid> {
    let mut r_max: f64 = 0.0;
    for i in 0..e.len() {
        r_max = r_max.max(e.radius(i));
    }
    if r_max <= 0.0 {
        r_max = fallback_r;
    }
    Arc::new(RadialGrid::uniform(1.0001 * r_max, 256).unwrap())
}

/// Populates the energy report of a view.
pub fn energy_report(f: &DistributionView) -> Result<EnergyReport, FunctionalsError> {
    let (h_cin, h_pot, mass) = match f {
        DistributionView::Analytic(tm) => (
            tm.kinetic_factor() * tm.base.kinetic_energy(),
            tm.potential_factor() * tm.base.potential_energy(),
            tm.mass(),
        ),
        DistributionView::Ensemble { particles, .. } => {
            if particles.is_empty() {
                (0.0, 0.0, 0.0)
            } else {
                let grid = binning_grid(particles, 1.0);
                let rho = spatial_density(f, &grid)?;
                (
                    particles.kinetic_energy(),
                    potential_energy_of_density(&rho)?,
                    particles.total_mass(),
                )
            }
        }
        DistributionView::Gridded(g) => {
            let h_cin = g.integral_of(|_, w, _, v| 0.5 * w * w * v);
            let grid = Arc::new(RadialGrid::uniform(g.grid.r_max, 257)?);
            let rho = spatial_density(f, &grid)?;
            (h_cin, potential_energy_of_density(&rho)?, g.integral())
        }
    };
    let mut lp_norms = BTreeMap::new();
    lp_norms.insert("1".to_string(), lp_norm(f, 1.0)?);
    lp_norms.insert("2".to_string(), lp_norm(f, 2.0)?);
    lp_norms.insert("inf".to_string(), lp_norm(f, f64::INFINITY)?);
    Ok(EnergyReport {
        h_cin,
        h_pot,
        hamiltonian: h_cin - h_pot,
        mass,
        lp_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{build_equilibrium, AnsatzLaw};
    use crate::functionals::gridded::{GriddedF, PhaseGrid};

    fn king() -> crate::equilibrium::EquilibriumModel {
        build_equilibrium(&AnsatzLaw::King, 1.0, &RadialGrid::uniform(20.0, 512).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_distribution_reports_zeros() {
        let g = GriddedF::zeros(PhaseGrid {
            n_r: 16,
            n_w: 8,
            n_c: 4,
            r_max: 1.0,
            w_max: 1.0,
        });
        let view = DistributionView::gridded(&g);
        let rep = energy_report(&view).unwrap();
        assert_eq!(rep.h_cin, 0.0);
        assert_eq!(rep.h_pot, 0.0);
        assert_eq!(rep.mass, 0.0);
    }

    #[test]
    fn king_model_is_a_bound_state() {
        let m = king();
        let rep = energy_report(&DistributionView::model(&m)).unwrap();
        assert!(rep.hamiltonian < 0.0);
        assert!(rep.h_cin > 0.0 && rep.h_pot > 0.0);
        assert!((rep.hamiltonian - (rep.h_cin - rep.h_pot)).abs() <= 1e-15 * rep.h_pot.abs());
        assert!((rep.mass - m.mass()).abs() < 1e-12 * m.mass());
    }

    #[test]
    fn uniform_ball_potential_energy_oracle() {
        // ρ = 1 on r < 1: H_pot = 4π/15.
        let grid = Arc::new(RadialGrid::uniform(1.0, 513).unwrap());
        let rho = RadialProfile::from_fn(grid, Extrapolation::Zero, |_| 1.0).unwrap();
        let h_pot = potential_energy_of_density(&rho).unwrap();
        assert!((h_pot - 4.0 * PI / 15.0).abs() < 1e-8, "{h_pot}");
    }

    #[test]
    fn analytic_density_matches_model_profile() {
        let m = king();
        let view = DistributionView::model(&m);
        let rho = spatial_density(&view, &m.rho().grid_arc()).unwrap();
        for (a, b) in rho.values().iter().zip(m.rho().values()) {
            assert!((a - b).abs() <= 1e-10 * m.rho().values()[0]);
        }
    }

    #[test]
    fn single_shell_particle_density() {
        let m = king();
        let e = crate::dynamics::ParticleEnsemble::new(
            vec![[0.5, 0.0, 0.0]],
            vec![[0.0, 0.0, 0.0]],
            vec![2.5],
        )
        .unwrap();
        let grid = Arc::new(RadialGrid::uniform(1.0, 64).unwrap());
        let view = DistributionView::ensemble(&e, PhaseGrid::default_for(&m));
        let rho = spatial_density(&view, &grid).unwrap();
        let total = integrate_radial(&rho, |_| 1.0).unwrap();
        // The interpolated spike integrates to the shell mass only up to
        // O(h²) midpoint corrections.
        assert!((total - 2.5).abs() < 0.02 * 2.5, "total {total}");
        // Support concentrated in one shell.
        let nonzero = rho.values().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn sampled_density_close_to_model() {
        let m = king();
        let n = 100_000;
        let e = crate::equilibrium::sample_particles(&m, n, 3);
        let grid = Arc::new(RadialGrid::uniform(1.02 * m.support_radius(), 48).unwrap());
        let view = DistributionView::ensemble(&e, PhaseGrid::default_for(&m));
        let rho = spatial_density(&view, &grid).unwrap();
        // Binomial binning error estimate per shell: σ ≈ ρ/√count.
        let nodes = grid.nodes();
        for k in 1..nodes.len() - 1 {
            let model_rho = m.rho().eval(nodes[k]);
            let vol = 4.0 * PI / 3.0
                * ((0.5 * (nodes[k] + nodes[k + 1])).powi(3)
                    - (0.5 * (nodes[k - 1] + nodes[k])).powi(3));
            let expected_count = model_rho * vol / (m.mass() / n as f64);
            if expected_count < 20.0 {
                continue;
            }
            let sigma = model_rho / expected_count.sqrt();
            assert!(
                (rho.values()[k] - model_rho).abs() < 5.0 * sigma + 0.02 * model_rho,
                "shell {k}"
            );
        }
    }
}
