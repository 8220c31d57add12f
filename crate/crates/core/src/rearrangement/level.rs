//! Level profiles: the decreasing value-versus-phase-volume map
//! `vol(s) = |{f ≥ s}|` that two equimeasurable distributions share.

use std::io::Write;

use super::energy_volume_at;
use super::RearrangeError;
use crate::functionals::{DistributionView, GriddedF};
use crate::radial::{Direction, MonotoneMap};

/// Number of logarithmically spaced thresholds used by default; resolves the
/// steep edge of King-type profiles.
pub const DEFAULT_LEVELS: usize = 512;

#[derive(Debug, Clone)]
pub struct LevelProfile {
    /// `s ↦ vol(s)`, decreasing, right-continuous.
    map: MonotoneMap,
    mass: f64,
    max_value: f64,
}

impl LevelProfile {
    /// Samples `vol(s)` at `n_levels` thresholds between `max f · 1e-6`
    /// and `max f`.
    pub fn from_view(f: &DistributionView, n_levels: usize) -> Result<Self, RearrangeError> {
        assert!(n_levels >= 2);
        match f {
            DistributionView::Analytic(tm) => {
                if !tm.params.is_identity() {
                    // Levels of γ f(x/λ, μv): value s occurs where f ≥ s/γ,
                    // with volumes scaled by λ³/μ³.
                    let base = LevelProfile::from_view(
                        &DistributionView::model(tm.base),
                        n_levels,
                    )?;
                    let vol_factor = (tm.params.lambda / tm.params.mu).powi(3);
                    let gamma = tm.params.gamma;
                    let s: Vec<f64> =
                        base.map.breakpoints().iter().map(|&s| gamma * s).collect();
                    let vol: Vec<f64> =
                        base.map.values().iter().map(|&v| vol_factor * v).collect();
                    return Ok(LevelProfile {
                        map: MonotoneMap::new(s, vol, Direction::Decreasing)?,
                        mass: tm.mass_factor() * base.mass,
                        max_value: gamma * base.max_value,
                    });
                }
                let model = tm.base;
                let f_max = model.f_max();
                let thresholds = log_levels(f_max, n_levels);
                // f0 ≥ s on the energy ball E < E_s with F(E_s) = s.
                let vols = thresholds
                    .iter()
                    .map(|&s| {
                        let depth = invert_law(model, s);
                        let e_s = model.e0() - depth;
                        if e_s <= model.phi_c() {
                            Ok(0.0)
                        } else {
                            energy_volume_at(model.phi(), e_s)
                        }
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                Ok(LevelProfile {
                    map: MonotoneMap::new_flattened(thresholds, vols, Direction::Decreasing)?,
                    mass: model.mass(),
                    max_value: f_max,
                })
            }
            _ => {
                let grid = f.phase_grid().expect("non-analytic views carry a grid");
                let (cells, clipped) = f.to_gridded(grid);
                let mut profile = Self::from_cells(&cells, n_levels)?;
                profile.mass += clipped;
                Ok(profile)
            }
        }
    }

    /// Exact step counts on a gridded distribution.
    pub fn from_cells(cells: &GriddedF, n_levels: usize) -> Result<Self, RearrangeError> {
        let max_value = cells.max_abs();
        if max_value == 0.0 {
            return Err(RearrangeError::EmptyDistribution);
        }
        let thresholds = log_levels(max_value, n_levels);
        let grid = cells.grid;
        let mut pairs: Vec<(f64, f64)> = (0..grid.cells())
            .map(|idx| {
                let (i, j, _) = grid.split(idx);
                (cells.values[idx], grid.cell_volume(i, j))
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // Suffix volume sums: vol(s) = Σ_{value >= s} vol.
        let mut suffix = vec![0.0; pairs.len() + 1];
        for i in (0..pairs.len()).rev() {
            suffix[i] = suffix[i + 1] + pairs[i].1;
        }
        let vols: Vec<f64> = thresholds
            .iter()
            .map(|&s| suffix[pairs.partition_point(|p| p.0 < s)])
            .collect();
        let mass = pairs.iter().map(|(v, vol)| v * vol).sum();
        Ok(LevelProfile {
            map: MonotoneMap::new_flattened(thresholds, vols, Direction::Decreasing)?,
            mass,
            max_value,
        })
    }

    pub fn vol_at(&self, s: f64) -> f64 {
        if s > self.max_value {
            0.0
        } else {
            self.map.eval(s)
        }
    }

    /// Generalized inverse: the decreasing rearrangement value at cumulative
    /// volume `V`.
    pub fn value_at_volume(&self, v: f64) -> f64 {
        if v >= self.vol_at(self.map.breakpoints()[0]) {
            return 0.0;
        }
        let (s, _clamped) = self.map.invert(v);
        s
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    /// Phase volume of the support as resolved by the smallest threshold.
    pub fn support_volume(&self) -> f64 {
        self.map.values()[0]
    }

    pub fn thresholds(&self) -> &[f64] {
        self.map.breakpoints()
    }

    pub fn volumes(&self) -> &[f64] {
        self.map.values()
    }

    /// CSV rows `s,volume`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,volume")?;
        for (s, v) in self.map.breakpoints().iter().zip(self.map.values()) {
            writeln!(w, "{s},{v}")?;
        }
        Ok(())
    }
}

/// `‖f* - g*‖_{L¹} = ∫ |λ_f(V) - λ_g(V)| dV` between the decreasing
/// rearrangements, evaluated on the merged volume samples.
pub fn rearranged_l1_distance(a: &LevelProfile, b: &LevelProfile) -> f64 {
    let mut vs: Vec<f64> = a
        .volumes()
        .iter()
        .chain(b.volumes())
        .copied()
        .filter(|v| *v > 0.0)
        .collect();
    vs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vs.dedup();
    let mut acc = 0.0;
    let mut prev_v = 0.0;
    let mut prev_d = (a.value_at_volume(0.0) - b.value_at_volume(0.0)).abs();
    for &v in &vs {
        let d = (a.value_at_volume(v) - b.value_at_volume(v)).abs();
        acc += 0.5 * (prev_d + d) * (v - prev_v);
        prev_v = v;
        prev_d = d;
    }
    acc
}

fn log_levels(max_value: f64, n: usize) -> Vec<f64> {
    let lo = max_value * 1e-6;
    (0..n)
        .map(|k| lo * (max_value / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Depth `d` with `F(depth d) = s`, by bisection (the laws are increasing
/// in depth).
fn invert_law(model: &crate::equilibrium::EquilibriumModel, s: f64) -> f64 {
    let law = model.law();
    let mut lo = 0.0;
    let mut hi = model.u_c();
    if law.f_of_depth(hi) <= s {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if law.f_of_depth(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
