//! Mean-field acceleration solvers for particle ensembles.

use std::f64::consts::PI;

use super::{DynamicsError, ParticleEnsemble};
use crate::exec;

/// Largest ensemble accepted by the direct summation solver.
pub const DIRECT_SUM_BUDGET: usize = 30_000;

/// Exact mean field for spherically symmetric data: each particle feels the
/// weight strictly inside its radius (half of any weight at exactly equal
/// radius), `a_i = -(m_i / (4π r_i²)) x̂_i`. One sort and a prefix sum.
pub fn field_radial(e: &ParticleEnsemble) -> Vec<[f64; 3]> {
    let n = e.len();
    let radii: Vec<f64> = (0..n).map(|i| e.radius(i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    sort_by_radius(&mut order, &radii);

    // Cumulative weight strictly below each sorted position, with groups of
    // equal radius handled by the half-weight rule.
    let mut interior = vec![0.0; n];
    let mut below = 0.0;
    let mut g0 = 0;
    while g0 < n {
        let mut g1 = g0;
        let mut group_weight = 0.0;
        while g1 < n && radii[order[g1]] == radii[order[g0]] {
            group_weight += e.weights[order[g1]];
            g1 += 1;
        }
        for &i in &order[g0..g1] {
            interior[i] = below + 0.5 * (group_weight - e.weights[i]);
        }
        below += group_weight;
        g0 = g1;
    }

    exec::map_indexed(n, |i| {
        let r = radii[i];
        if r == 0.0 {
            return [0.0; 3];
        }
        let g = -interior[i] / (4.0 * PI * r * r * r);
        let x = e.positions[i];
        [g * x[0], g * x[1], g * x[2]]
    })
}

#[cfg(feature = "parallel")]
fn sort_by_radius(order: &mut [usize], radii: &[f64]) {
    use rayon::prelude::*;
    order.par_sort_unstable_by(|&a, &b| {
        radii[a].partial_cmp(&radii[b]).unwrap().then(a.cmp(&b))
    });
}

#[cfg(not(feature = "parallel"))]
fn sort_by_radius(order: &mut [usize], radii: &[f64]) {
    order.sort_unstable_by(|&a, &b| radii[a].partial_cmp(&radii[b]).unwrap().then(a.cmp(&b)));
}

/// Pairwise potential energy of the exact shell interaction
/// `-w_i w_j / (4π max(r_i, r_j))`, via sorted prefix and suffix sums.
pub fn potential_energy_radial(e: &ParticleEnsemble) -> f64 {
    let n = e.len();
    let radii: Vec<f64> = (0..n).map(|i| e.radius(i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    sort_by_radius(&mut order, &radii);
    // φ_i = -(1/4π)[ (Σ_{r_j ≤ r_i, j≠i} w_j)/r_i + Σ_{r_j > r_i} w_j/r_j ].
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        let j = order[k];
        suffix[k] = suffix[k + 1] + e.weights[j] / radii[j].max(1e-300);
    }
    let mut below = 0.0;
    let mut g0 = 0;
    let mut h_pot = 0.0;
    while g0 < n {
        let mut g1 = g0;
        let mut group_weight = 0.0;
        while g1 < n && radii[order[g1]] == radii[order[g0]] {
            group_weight += e.weights[order[g1]];
            g1 += 1;
        }
        for k in g0..g1 {
            let i = order[k];
            let r = radii[i].max(1e-300);
            let same_shell = group_weight - e.weights[i];
            let phi = -((below + same_shell) / r + suffix[g1]) / (4.0 * PI);
            h_pot -= 0.5 * e.weights[i] * phi;
        }
        below += group_weight;
        g0 = g1;
    }
    h_pot
}

/// Softened direct summation
/// `a_i = -Σ_{j≠i} w_j (x_i - x_j) / (4π (|x_i - x_j|² + eps²)^{3/2})`.
/// Deterministic for any thread count: each `a_i` sums its pairs in index
/// order.
pub fn field_direct(e: &ParticleEnsemble, eps: f64) -> Result<Vec<[f64; 3]>, DynamicsError> {
    if e.len() > DIRECT_SUM_BUDGET {
        return Err(DynamicsError::DirectSumBudget {
            n: e.len(),
            budget: DIRECT_SUM_BUDGET,
        });
    }
    if !(eps > 0.0) {
        return Err(DynamicsError::BadSoftening(eps));
    }
    Ok(exec::map_indexed(e.len(), |i| direct_row(e, eps, i)))
}

/// Sequential reference implementation of [`field_direct`]; used by the
/// benches and the determinism tests.
pub fn field_direct_seq(e: &ParticleEnsemble, eps: f64) -> Result<Vec<[f64; 3]>, DynamicsError> {
    if e.len() > DIRECT_SUM_BUDGET {
        return Err(DynamicsError::DirectSumBudget {
            n: e.len(),
            budget: DIRECT_SUM_BUDGET,
        });
    }
    if !(eps > 0.0) {
        return Err(DynamicsError::BadSoftening(eps));
    }
    Ok((0..e.len()).map(|i| direct_row(e, eps, i)).collect())
}

#[inline]
fn direct_row(e: &ParticleEnsemble, eps: f64, i: usize) -> [f64; 3] {
    let xi = e.positions[i];
    let eps2 = eps * eps;
    let mut acc = [0.0; 3];
    for j in 0..e.len() {
        if j == i {
            continue;
        }
        let xj = e.positions[j];
        let dx = [xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]];
        let d2 = dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2] + eps2;
        let inv = e.weights[j] / (4.0 * PI * d2 * d2.sqrt());
        acc[0] -= inv * dx[0];
        acc[1] -= inv * dx[1];
        acc[2] -= inv * dx[2];
    }
    acc
}

/// Softened pairwise potential energy `½ Σ w_i φ_i`.
pub fn potential_energy_direct(e: &ParticleEnsemble, eps: f64) -> f64 {
    let eps2 = eps * eps;
    -0.5 * exec::sum_indexed(e.len(), |i| {
        let xi = e.positions[i];
        let mut phi = 0.0;
        for j in 0..e.len() {
            if j == i {
                continue;
            }
            let xj = e.positions[j];
            let dx = [xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]];
            let d2 = dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2] + eps2;
            phi -= e.weights[j] / (4.0 * PI * d2.sqrt());
        }
        e.weights[i] * phi
    })
}
