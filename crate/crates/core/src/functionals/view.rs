//! A distribution under analysis: analytic (model-backed), particle-borne
//! or gridded.

use super::gridded::{GriddedF, PhaseGrid};
use crate::dynamics::ParticleEnsemble;
use crate::equilibrium::{EquilibriumModel, TransformedModel};

#[derive(Debug, Clone)]
pub enum DistributionView<'a> {
    /// A steady state composed with a symmetry transformation (identity
    /// included).
    Analytic(TransformedModel<'a>),
    /// Weighted samples, binned on the declared grid whenever a density is
    /// needed.
    Ensemble {
        particles: &'a ParticleEnsemble,
        grid: PhaseGrid,
    },
    /// Values on a phase grid.
    Gridded(&'a GriddedF),
}

impl<'a> DistributionView<'a> {
    pub fn model(model: &'a EquilibriumModel) -> Self {
        DistributionView::Analytic(TransformedModel::identity(model))
    }

    pub fn transformed(tm: TransformedModel<'a>) -> Self {
        DistributionView::Analytic(tm)
    }

    pub fn ensemble(particles: &'a ParticleEnsemble, grid: PhaseGrid) -> Self {
        DistributionView::Ensemble { particles, grid }
    }

    pub fn gridded(f: &'a GriddedF) -> Self {
        DistributionView::Gridded(f)
    }

    /// Materializes the view on a phase grid (cell centers for analytic
    /// views, binning for ensembles). The second component is the mass that
    /// fell outside the grid, zero except for ensembles.
    pub fn to_gridded(&self, grid: PhaseGrid) -> (GriddedF, f64) {
        match self {
            DistributionView::Analytic(tm) => {
                let f = GriddedF::from_fn(grid, |r, w, c| {
                    let x = [r, 0.0, 0.0];
                    let s = (1.0 - c * c).max(0.0).sqrt();
                    let v = [w * c, w * s, 0.0];
                    tm.f_at(x, v)
                });
                (f, 0.0)
            }
            DistributionView::Ensemble { particles, grid: _ } => {
                GriddedF::bin_ensemble(grid, particles, [0.0; 3])
            }
            DistributionView::Gridded(f) => {
                if f.grid == grid {
                    ((*f).clone(), 0.0)
                } else {
                    // Piecewise-constant resampling by containing cell.
                    let src = *f;
                    let out = GriddedF::from_fn(grid, |r, w, c| value_at(src, r, w, c));
                    (out, 0.0)
                }
            }
        }
    }

    /// Declared phase grid of the view, when it has one.
    pub fn phase_grid(&self) -> Option<PhaseGrid> {
        match self {
            DistributionView::Analytic(_) => None,
            DistributionView::Ensemble { grid, .. } => Some(*grid),
            DistributionView::Gridded(f) => Some(f.grid),
        }
    }
}

fn value_at(f: &GriddedF, r: f64, w: f64, c: f64) -> f64 {
    let g = f.grid;
    if r >= g.r_max || w >= g.w_max {
        return 0.0;
    }
    let i = ((r / g.dr()) as usize).min(g.n_r - 1);
    let j = ((w / g.dw()) as usize).min(g.n_w - 1);
    let k = (((c + 1.0) / g.dc()) as usize).min(g.n_c - 1);
    f.values[g.index(i, j, k)]
}
