//! Cell-based phase-space grids over `(r, w, c)` with `w = |v|` and
//! `c = x·v/(|x||v|)`, used for binning ensembles and representing
//! spherically symmetric distribution functions.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::dynamics::ParticleEnsemble;
use crate::equilibrium::EquilibriumModel;
use crate::exec;

/// Cell layout: `n_r × n_w × n_c` uniform cells over
/// `[0, r_max] × [0, w_max] × [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub n_r: usize,
    pub n_w: usize,
    pub n_c: usize,
    pub r_max: f64,
    pub w_max: f64,
}

impl PhaseGrid {
    /// Default extents for distributions near a model: covers the support
    /// with margin for perturbed states.
    pub fn default_for(model: &EquilibriumModel) -> Self {
        PhaseGrid {
            n_r: 64,
            n_w: 64,
            n_c: 32,
            r_max: 1.5 * model.support_radius(),
            w_max: 1.2 * (2.0 * model.phi_c().abs()).sqrt(),
        }
    }

    pub fn cells(&self) -> usize {
        self.n_r * self.n_w * self.n_c
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    pub fn dw(&self) -> f64 {
        self.w_max / self.n_w as f64
    }

    pub fn dc(&self) -> f64 {
        2.0 / self.n_c as f64
    }

    pub fn r_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }

    pub fn w_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dw()
    }

    pub fn c_center(&self, k: usize) -> f64 {
        -1.0 + (k as f64 + 0.5) * self.dc()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_w + j) * self.n_c + k
    }

    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let k = idx % self.n_c;
        let j = (idx / self.n_c) % self.n_w;
        let i = idx / (self.n_c * self.n_w);
        (i, j, k)
    }

    /// Exact phase volume of cell `(i, j, *)`:
    /// `(4π/3)(r₊³-r₋³) · (2π/3)(w₊³-w₋³) · Δc`.
    pub fn cell_volume(&self, i: usize, j: usize) -> f64 {
        let (r0, r1) = (i as f64 * self.dr(), (i as f64 + 1.0) * self.dr());
        let (w0, w1) = (j as f64 * self.dw(), (j as f64 + 1.0) * self.dw());
        (4.0 * PI / 3.0) * (r1.powi(3) - r0.powi(3))
            * (2.0 * PI / 3.0)
            * (w1.powi(3) - w0.powi(3))
            * self.dc()
    }

    fn locate(&self, r: f64, w: f64, c: f64) -> Option<usize> {
        if !(r >= 0.0 && r < self.r_max && w >= 0.0 && w < self.w_max) {
            return None;
        }
        let i = ((r / self.dr()) as usize).min(self.n_r - 1);
        let j = ((w / self.dw()) as usize).min(self.n_w - 1);
        let k = (((c + 1.0) / self.dc()) as usize).min(self.n_c - 1);
        Some(self.index(i, j, k))
    }
}

/// Cell-averaged values of a distribution on a [`PhaseGrid`].
#[derive(Debug, Clone)]
pub struct GriddedF {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
}

impl GriddedF {
    pub fn zeros(grid: PhaseGrid) -> Self {
        GriddedF {
            values: vec![0.0; grid.cells()],
            grid,
        }
    }

    /// Samples `f(r, w, c)` at cell centers.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let values = exec::map_indexed(grid.cells(), |idx| {
            let (i, j, k) = grid.split(idx);
            f(grid.r_center(i), grid.w_center(j), grid.c_center(k))
        });
        GriddedF { grid, values }
    }

    /// Bins an ensemble about `center`. Returns the gridded density together
    /// with the weight that fell outside the grid.
    pub fn bin_ensemble(
        grid: PhaseGrid,
        e: &ParticleEnsemble,
        center: [f64; 3],
    ) -> (Self, f64) {
        let idx: Vec<(usize, f64)> = (0..e.len())
            .map(|p| {
                let x = [
                    e.positions[p][0] - center[0],
                    e.positions[p][1] - center[1],
                    e.positions[p][2] - center[2],
                ];
                let v = e.velocities[p];
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let w = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let c = if r > 0.0 && w > 0.0 {
                    ((x[0] * v[0] + x[1] * v[1] + x[2] * v[2]) / (r * w)).clamp(-1.0, 1.0)
                } else {
                    0.0
                };
                match grid.locate(r, w, c) {
                    Some(cell) => (cell, e.weights[p]),
                    None => (usize::MAX, e.weights[p]),
                }
            })
            .collect();
        let mut hist = exec::histogram(&idx, grid.cells() + 1, |&(cell, w)| {
            if cell == usize::MAX {
                Some((grid.cells(), w))
            } else {
                Some((cell, w))
            }
        });
        let clipped = hist.pop().unwrap();
        let values: Vec<f64> = hist
            .iter()
            .enumerate()
            .map(|(idx, &m)| {
                let (i, j, _) = grid.split(idx);
                m / grid.cell_volume(i, j)
            })
            .collect();
        (GriddedF { grid, values }, clipped)
    }

    /// `∫ f dx dv` as the exact cell-volume sum.
    pub fn integral(&self) -> f64 {
        let grid = self.grid;
        exec::sum_indexed(grid.cells(), |idx| {
            let (i, j, _) = grid.split(idx);
            self.values[idx] * grid.cell_volume(i, j)
        })
    }

    /// `∫ g(r, w, c, f) dx dv` with `g` evaluated on cell centers.
    pub fn integral_of(&self, g: impl Fn(f64, f64, f64, f64) -> f64 + Sync) -> f64 {
        let grid = self.grid;
        exec::sum_indexed(grid.cells(), |idx| {
            let (i, j, k) = grid.split(idx);
            g(
                grid.r_center(i),
                grid.w_center(j),
                grid.c_center(k),
                self.values[idx],
            ) * grid.cell_volume(i, j)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Spatial density at each radial cell index: `ρ_i = Σ_{j,k} f Δv`.
    pub fn radial_density(&self) -> Vec<f64> {
        let grid = self.grid;
        (0..grid.n_r)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..grid.n_w {
                    let (w0, w1) = (j as f64 * grid.dw(), (j as f64 + 1.0) * grid.dw());
                    let dv = 2.0 * PI / 3.0 * (w1.powi(3) - w0.powi(3)) * grid.dc();
                    for k in 0..grid.n_c {
                        acc += self.values[grid.index(i, j, k)] * dv;
                    }
                }
                acc
            })
            .collect()
    }

    /// Binary layout: header `n_r, n_w, n_c` (u64), `r_max, w_max` (f64),
    /// payload row-major values as little-endian 8-byte floats.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for d in [self.grid.n_r, self.grid.n_w, self.grid.n_c] {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        w.write_all(&self.grid.r_max.to_le_bytes())?;
        w.write_all(&self.grid.w_max.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> std::io::Result<Self> {
        let mut buf = [0u8; 8];
        let mut dims = [0usize; 3];
        for d in dims.iter_mut() {
            r.read_exact(&mut buf)?;
            *d = u64::from_le_bytes(buf) as usize;
        }
        r.read_exact(&mut buf)?;
        let r_max = f64::from_le_bytes(buf);
        r.read_exact(&mut buf)?;
        let w_max = f64::from_le_bytes(buf);
        let grid = PhaseGrid {
            n_r: dims[0],
            n_w: dims[1],
            n_c: dims[2],
            r_max,
            w_max,
        };
        let mut values = vec![0.0; grid.cells()];
        for v in values.iter_mut() {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        Ok(GriddedF { grid, values })
    }
}
