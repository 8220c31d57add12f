//! Stability distances: the invariant-based `D(f, f0)` and the
//! velocity-weighted distance of the orbital-stability statement, measured
//! after re-centering by a shift.

use super::energy::energy_report;
use super::gridded::{GriddedF, PhaseGrid};
use super::view::DistributionView;
use super::FunctionalsError;
use crate::dynamics::ParticleEnsemble;
use crate::equilibrium::EquilibriumModel;

/// `D(f, f0) = ‖f - f0‖_{L¹} + |H(f) - H(f0)|`, with the L¹ part evaluated
/// on a common phase-grid discretization.
pub fn stability_distance(
    f: &DistributionView,
    model: &EquilibriumModel,
) -> Result<f64, FunctionalsError> {
    let grid = f
        .phase_grid()
        .unwrap_or_else(|| PhaseGrid::default_for(model));
    let (binned, clipped) = f.to_gridded(grid);
    let reference = DistributionView::model(model).to_gridded(grid).0;
    let l1 = l1_between(&binned, &reference) + clipped;
    let h_f = energy_report(f)?.hamiltonian;
    let h_0 = model.hamiltonian();
    Ok(l1 + (h_f - h_0).abs())
}

fn l1_between(a: &GriddedF, b: &GriddedF) -> f64 {
    debug_assert_eq!(a.grid, b.grid);
    let grid = a.grid;
    crate::exec::sum_indexed(grid.cells(), |idx| {
        let (i, j, _) = grid.split(idx);
        (a.values[idx] - b.values[idx]).abs() * grid.cell_volume(i, j)
    })
}

/// `∫ (1 + |v|²) |f - f0(x - z, ·)|`, computed on a co-moving binning
/// centered at `z`. Mass outside the grid enters with its own weight.
pub fn weighted_shift_distance(
    e: &ParticleEnsemble,
    model: &EquilibriumModel,
    z: [f64; 3],
    grid: PhaseGrid,
) -> Result<f64, FunctionalsError> {
    if e.len() < 100 {
        return Err(FunctionalsError::Undersampled(e.len()));
    }
    let (binned, _) = GriddedF::bin_ensemble(grid, e, z);
    let reference = DistributionView::model(model).to_gridded(grid).0;
    let mut dist = crate::exec::sum_indexed(grid.cells(), |idx| {
        let (i, j, _) = grid.split(idx);
        let w = grid.w_center(j);
        (1.0 + w * w) * (binned.values[idx] - reference.values[idx]).abs()
            * grid.cell_volume(i, j)
    });
    // Clipped particles contribute |f| (1 + |v|²) directly.
    dist += crate::exec::sum_indexed(e.len(), |p| {
        let x = [
            e.positions[p][0] - z[0],
            e.positions[p][1] - z[1],
            e.positions[p][2] - z[2],
        ];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let w = e.speed(p);
        if r >= grid.r_max || w >= grid.w_max {
            e.weights[p] * (1.0 + w * w)
        } else {
            0.0
        }
    });
    Ok(dist)
}

/// Translation estimate: the mass centroid of the innermost 90% of the
/// particles (ranked by distance to the full centroid).
pub fn estimate_shift(e: &ParticleEnsemble) -> Result<[f64; 3], FunctionalsError> {
    if e.len() < 100 {
        return Err(FunctionalsError::Undersampled(e.len()));
    }
    let c0 = e.centroid();
    let mut by_dist: Vec<(f64, usize)> = (0..e.len())
        .map(|i| {
            let x = e.positions[i];
            let d = ((x[0] - c0[0]).powi(2) + (x[1] - c0[1]).powi(2) + (x[2] - c0[2]).powi(2))
                .sqrt();
            (d, i)
        })
        .collect();
    by_dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total = e.total_mass();
    let mut kept = 0.0;
    let mut c = [0.0; 3];
    for &(_, i) in &by_dist {
        if kept >= 0.9 * total {
            break;
        }
        kept += e.weights[i];
        for a in 0..3 {
            c[a] += e.weights[i] * e.positions[i][a];
        }
    }
    Ok([c[0] / kept, c[1] / kept, c[2] / kept])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{build_equilibrium, sample_particles, symmetry_transform, AnsatzLaw};
    use crate::radial::RadialGrid;

    fn model() -> EquilibriumModel {
        build_equilibrium(
            &AnsatzLaw::King,
            1.0,
            &RadialGrid::uniform(20.0, 256).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn self_distance_is_zero() {
        let m = model();
        let d = stability_distance(&DistributionView::model(&m), &m).unwrap();
        assert!(d.abs() < 1e-12 * m.mass());
    }

    #[test]
    fn scaled_distribution_distance_is_linear_in_gamma() {
        let m = model();
        // D(γ f0, f0) = |γ-1| ‖f0‖₁ + |γ H_cin... both terms linear near 1.
        let mut prev = 0.0;
        for (k, gamma) in [1.01_f64, 1.02].iter().enumerate() {
            let t = symmetry_transform(&m, *gamma, 1.0, 1.0, [0.0; 3]);
            let d = stability_distance(&DistributionView::transformed(t), &m).unwrap();
            assert!(d > 0.0);
            if k == 1 {
                let ratio = d / prev;
                assert!((ratio - 2.0).abs() < 0.15, "ratio {ratio}");
            }
            prev = d;
        }
    }

    #[test]
    fn shift_estimate_recovers_translation() {
        let m = model();
        let mut e = sample_particles(&m, 20_000, 5);
        let z0 = [0.3, -0.2, 0.15];
        for x in e.positions.iter_mut() {
            for a in 0..3 {
                x[a] += z0[a];
            }
        }
        let z = estimate_shift(&e).unwrap();
        for a in 0..3 {
            // Monte Carlo centroid error ~ R/√N.
            assert!((z[a] - z0[a]).abs() < 0.03, "axis {a}: {} vs {}", z[a], z0[a]);
        }
    }

    #[test]
    fn estimated_shift_nearly_minimizes_distance() {
        let m = model();
        let mut e = sample_particles(&m, 20_000, 9);
        let z0 = [0.2, 0.1, -0.05];
        for x in e.positions.iter_mut() {
            for a in 0..3 {
                x[a] += z0[a];
            }
        }
        let grid = PhaseGrid::default_for(&m);
        let z = estimate_shift(&e).unwrap();
        let at_estimate = weighted_shift_distance(&e, &m, z, grid).unwrap();
        // Brute-force scan over a local grid of trial shifts.
        let mut best = f64::INFINITY;
        let step = 0.5 * m.support_radius() / 16.0;
        for dx in -2..=2 {
            for dy in -2..=2 {
                let trial = [z[0] + dx as f64 * step, z[1] + dy as f64 * step, z[2]];
                best = best.min(weighted_shift_distance(&e, &m, trial, grid).unwrap());
            }
        }
        assert!(at_estimate <= best * 1.05, "{at_estimate} vs scan {best}");
    }

    #[test]
    fn baseline_distance_is_pure_sampling_noise() {
        let m = model();
        let grid = PhaseGrid::default_for(&m);
        let e1 = sample_particles(&m, 20_000, 21);
        let e2 = sample_particles(&m, 20_000, 22);
        let d1 = weighted_shift_distance(&e1, &m, [0.0; 3], grid).unwrap();
        let d2 = weighted_shift_distance(&e2, &m, [0.0; 3], grid).unwrap();
        // Same-size samples from the same law have the same noise floor.
        assert!(d1 > 0.0 && d2 > 0.0);
        assert!((d1 - d2).abs() < 0.2 * d1.max(d2));
    }

    #[test]
    fn undersampled_input_rejected() {
        let m = model();
        let e = sample_particles(&m, 50, 1);
        assert!(matches!(
            estimate_shift(&e),
            Err(FunctionalsError::Undersampled(50))
        ));
        assert!(weighted_shift_distance(&e, &m, [0.0; 3], PhaseGrid::default_for(&m)).is_err());
    }
}
