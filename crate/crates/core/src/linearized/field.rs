//! Perturbation fields `h(r, w, c)` with parity metadata in the velocity.
//!
//! The pitch variable `c = x·v/(|x||v|)` is discretized on Gauss-Legendre
//! nodes, so the node set is symmetric under `c → -c` and parity splits are
//! exact; `r` and `w` live on uniform cell centers, which keeps the radial
//! and speed derivatives clean five-point stencils away from `r = 0` and
//! `w = 0`.

use std::sync::Arc;

use super::LinearizedError;
use crate::equilibrium::EquilibriumModel;
use crate::exec;
use crate::radial::quad::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug)]
pub struct FieldGrid {
    pub n_r: usize,
    pub n_w: usize,
    pub n_c: usize,
    pub r_max: f64,
    pub w_max: f64,
    c_nodes: Vec<f64>,
    c_weights: Vec<f64>,
    /// Spectral differentiation matrix on the pitch nodes, row-major.
    d_c: Vec<f64>,
}

impl FieldGrid {
    pub fn new(n_r: usize, n_w: usize, n_c: usize, r_max: f64, w_max: f64) -> Arc<Self> {
        assert!(n_r >= 8 && n_w >= 8 && n_c >= 4 && n_c.is_multiple_of(2));
        let (c_nodes, c_weights) = gauss_legendre(n_c);
        let d_c = differentiation_matrix(&c_nodes);
        Arc::new(FieldGrid {
            n_r,
            n_w,
            n_c,
            r_max,
            w_max,
            c_nodes,
            c_weights,
            d_c,
        })
    }

    /// Grid sized for a model: radii cover the support, speeds the escape
    /// bound at the centre.
    pub fn for_model(model: &EquilibriumModel, n_r: usize, n_w: usize, n_c: usize) -> Arc<Self> {
        Self::new(
            n_r,
            n_w,
            n_c,
            model.support_radius(),
            (2.0 * model.u_c()).sqrt(),
        )
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    pub fn dw(&self) -> f64 {
        self.w_max / self.n_w as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }

    pub fn w(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dw()
    }

    pub fn c(&self, k: usize) -> f64 {
        self.c_nodes[k]
    }

    pub fn c_weight(&self, k: usize) -> f64 {
        self.c_weights[k]
    }

    pub fn cells(&self) -> usize {
        self.n_r * self.n_w * self.n_c
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

    /// Quadrature weight of a node: `8π² r² w² Δr Δw glw_c`.
    pub fn node_weight(&self, i: usize, j: usize, k: usize) -> f64 {
        let r = self.r(i);
        let w = self.w(j);
        8.0 * std::f64::consts::PI.powi(2)
            * r
            * r
            * w
            * w
            * self.dr()
            * self.dw()
            * self.c_weights[k]
    }
}

fn differentiation_matrix(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // Barycentric weights.
    let mut bw = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                bw[i] /= nodes[i] - nodes[j];
            }
        }
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bw[j] / bw[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

#[derive(Debug, Clone)]
pub struct PerturbationField {
    pub grid: Arc<FieldGrid>,
    pub values: Vec<f64>,
    pub parity: Parity,
}

impl PerturbationField {
    pub fn from_fn(
        grid: Arc<FieldGrid>,
        parity: Parity,
        f: impl Fn(f64, f64, f64) -> f64 + Sync,
    ) -> Result<Self, LinearizedError> {
        let values = exec::map_indexed(grid.cells(), |idx| {
            let (i, j, k) = grid.split(idx);
            f(grid.r(i), grid.w(j), grid.c(k))
        });
        let field = PerturbationField {
            grid,
            values,
            parity,
        };
        field.check_parity()?;
        Ok(field)
    }

    pub fn zeros(grid: Arc<FieldGrid>) -> Self {
        PerturbationField {
            values: vec![0.0; grid.cells()],
            grid,
            parity: Parity::Even,
        }
    }

    /// Verifies `h(r,w,-c) = ±h(r,w,c)` on the symmetric node set.
    pub fn check_parity(&self) -> Result<(), LinearizedError> {
        let sign = match self.parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
            Parity::None => return Ok(()),
        };
        let g = &self.grid;
        let scale = self.max_abs().max(1e-300);
        for i in 0..g.n_r {
            for j in 0..g.n_w {
                for k in 0..g.n_c / 2 {
                    let a = self.values[g.index(i, j, k)];
                    let b = self.values[g.index(i, j, g.n_c - 1 - k)];
                    if (a - sign * b).abs() > 1e-12 * scale {
                        return Err(LinearizedError::Parity);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ h dx dv`.
    pub fn integral(&self) -> f64 {
        let g = &self.grid;
        exec::sum_indexed(g.cells(), |idx| {
            let (i, j, k) = g.split(idx);
            self.values[idx] * g.node_weight(i, j, k)
        })
    }

    /// `∫ g h dx dv` with the weight evaluated on nodes.
    pub fn weighted_integral(&self, f: impl Fn(f64, f64, f64, f64) -> f64 + Sync) -> f64 {
        let g = &self.grid;
        exec::sum_indexed(g.cells(), |idx| {
            let (i, j, k) = g.split(idx);
            f(g.r(i), g.w(j), g.c(k), self.values[idx]) * g.node_weight(i, j, k)
        })
    }

    /// Radial derivative: five-point fourth-order stencils, one-sided at the
    /// boundary rows.
    pub fn d_dr(&self) -> Vec<f64> {
        self.stencil_derivative(0)
    }

    pub fn d_dw(&self) -> Vec<f64> {
        self.stencil_derivative(1)
    }

    /// Pitch derivative through the spectral differentiation matrix.
    pub fn d_dc(&self) -> Vec<f64> {
        let g = &self.grid;
        exec::map_indexed(g.cells(), |idx| {
            let (i, j, k) = g.split(idx);
            let mut acc = 0.0;
            for l in 0..g.n_c {
                acc += g.d_c[k * g.n_c + l] * self.values[g.index(i, j, l)];
            }
            acc
        })
    }

    fn stencil_derivative(&self, axis: usize) -> Vec<f64> {
        let g = &self.grid;
        let (n_axis, h) = match axis {
            0 => (g.n_r, g.dr()),
            _ => (g.n_w, g.dw()),
        };
        // Five-point weights for each offset of the target node within the
        // stencil (uniform spacing 1), scaled by 1/h on use.
        let unit: Vec<f64> = (0..5).map(|o| o as f64).collect();
        let stencils: Vec<Vec<f64>> = (0..5)
            .map(|o| crate::radial::numdiff::fd_weights(o as f64, &unit, 1))
            .collect();
        exec::map_indexed(g.cells(), |idx| {
            let (i, j, k) = g.split(idx);
            let pos = if axis == 0 { i } else { j };
            let lo = pos.saturating_sub(2).min(n_axis - 5);
            let weights = &stencils[pos - lo];
            let mut acc = 0.0;
            for (o, w) in weights.iter().enumerate() {
                let p = lo + o;
                let idx2 = if axis == 0 {
                    g.index(p, j, k)
                } else {
                    g.index(i, p, k)
                };
                acc += w * self.values[idx2];
            }
            acc / h
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<FieldGrid> {
        FieldGrid::new(32, 32, 12, 2.0, 1.5)
    }

    #[test]
    fn quadrature_weights_cover_phase_space() {
        let g = grid();
        let one = PerturbationField::from_fn(Arc::clone(&g), Parity::Even, |_, _, _| 1.0).unwrap();
        let vol = one.integral();
        let exact = (4.0 * std::f64::consts::PI / 3.0) * g.r_max.powi(3)
            * (4.0 * std::f64::consts::PI / 3.0)
            * g.w_max.powi(3);
        assert!((vol - exact).abs() < 1e-3 * exact, "{vol} vs {exact}");
    }

    #[test]
    fn parity_is_checked() {
        let g = grid();
        assert!(PerturbationField::from_fn(Arc::clone(&g), Parity::Odd, |_, _, c| c).is_ok());
        assert!(PerturbationField::from_fn(Arc::clone(&g), Parity::Even, |_, _, c| c * c).is_ok());
        assert!(matches!(
            PerturbationField::from_fn(Arc::clone(&g), Parity::Even, |_, _, c| c),
            Err(LinearizedError::Parity)
        ));
    }

    #[test]
    fn derivatives_are_fourth_order_on_smooth_data() {
        let worst_at = |n: usize| -> (f64, f64, f64) {
            let g = FieldGrid::new(n, n, 12, 2.0, 1.5);
            let f = PerturbationField::from_fn(Arc::clone(&g), Parity::None, |r, w, c| {
                (r * 1.3).sin() * (w * 0.7).cos() * (1.0 + 0.5 * c * c * c)
            })
            .unwrap();
            let dr = f.d_dr();
            let dw = f.d_dw();
            let dc = f.d_dc();
            let mut worst = (0.0f64, 0.0f64, 0.0f64);
            for idx in 0..g.cells() {
                let (i, j, k) = g.split(idx);
                let (r, w, c) = (g.r(i), g.w(j), g.c(k));
                let exact_r = 1.3 * (r * 1.3).cos() * (w * 0.7).cos() * (1.0 + 0.5 * c * c * c);
                let exact_w = -0.7 * (r * 1.3).sin() * (w * 0.7).sin() * (1.0 + 0.5 * c * c * c);
                let exact_c = (r * 1.3).sin() * (w * 0.7).cos() * 1.5 * c * c;
                worst.0 = worst.0.max((dr[idx] - exact_r).abs());
                worst.1 = worst.1.max((dw[idx] - exact_w).abs());
                worst.2 = worst.2.max((dc[idx] - exact_c).abs());
            }
            worst
        };
        let coarse = worst_at(24);
        let fine = worst_at(48);
        // Fourth order: doubling the resolution gains ~16x.
        assert!(coarse.0 / fine.0 > 10.0, "r ratio {}", coarse.0 / fine.0);
        assert!(coarse.1 / fine.1 > 10.0, "w ratio {}", coarse.1 / fine.1);
        // Spectral in c: machine precision for a cubic.
        assert!(coarse.2 < 1e-12 && fine.2 < 1e-12);
    }

    #[test]
    fn odd_integrands_cancel_exactly() {
        let g = grid();
        let f = PerturbationField::from_fn(Arc::clone(&g), Parity::Odd, |r, w, c| {
            c * (1.0 + r + w)
        })
        .unwrap();
        assert!(f.integral().abs() < 1e-14);
    }
}
