//! Radial grids and sampled radial profiles.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::sync::Arc;

use super::RadialError;

/// Strictly increasing radii `0 = r_0 < r_1 < … < r_n = r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

pub const MIN_GRID_NODES: usize = 16;

/// Default node count for model grids.
pub const DEFAULT_GRID_NODES: usize = 2048;

impl RadialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self, RadialError> {
        if nodes.len() < MIN_GRID_NODES {
            return Err(RadialError::GridTooSmall(nodes.len()));
        }
        if nodes[0] != 0.0 {
            return Err(RadialError::GridOrigin(nodes[0]));
        }
        if !nodes.iter().all(|r| r.is_finite()) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RadialError::GridNotIncreasing);
        }
        Ok(RadialGrid { nodes })
    }

    /// Uniform grid on `[0, r_max]`.
    pub fn uniform(r_max: f64, n: usize) -> Result<Self, RadialError> {
        let nodes = (0..n)
            .map(|i| r_max * i as f64 / (n - 1) as f64)
            .collect();
        Self::new(nodes)
    }

    /// Grid uniform over the inner 90% of `[0, r_max]` with 4x finer spacing
    /// over the outer 10%, where the support edge dominates the error budget.
    pub fn edge_refined(r_max: f64, n: usize) -> Result<Self, RadialError> {
        assert!(n >= MIN_GRID_NODES && r_max > 0.0);
        // Inner spacing h over [0, 0.9 r_max], h/4 over the rest:
        // 0.9/h + 0.4/h = (n-1)/r_max  =>  h = 1.3 r_max / (n-1).
        let h = 1.3 * r_max / (n - 1) as f64;
        let split = 0.9 * r_max;
        let n_in = (split / h).round() as usize;
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n_in {
            nodes.push(split * i as f64 / n_in as f64);
        }
        let n_out = n - n_in;
        for j in 0..n_out {
            nodes.push(split + (r_max - split) * j as f64 / (n_out - 1) as f64);
        }
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the cell `[r_k, r_{k+1})` containing `r`, clamped to the ends.
    pub fn cell_of(&self, r: f64) -> usize {
        if r <= self.nodes[0] {
            return 0;
        }
        if r >= self.r_max() {
            return self.nodes.len() - 2;
        }
        // partition_point: first index with node > r, minus one.
        self.nodes.partition_point(|&x| x <= r) - 1
    }
}

/// Behaviour of a profile beyond its last node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coefficient", rename_all = "snake_case")]
pub enum Extrapolation {
    Zero,
    /// `value(r) = c / r`, the exterior of a bounded potential.
    CoefOverR(f64),
    /// `value(r) = c / r^2`, the exterior of a radial field.
    CoefOverR2(f64),
}

/// A sampled function of radius with shape-preserving cubic interpolation.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    extrapolation: Extrapolation,
}

impl RadialProfile {
    pub fn new(
        grid: Arc<RadialGrid>,
        values: Vec<f64>,
        extrapolation: Extrapolation,
    ) -> Result<Self, RadialError> {
        if values.len() != grid.len() {
            return Err(RadialError::LengthMismatch {
                grid: grid.len(),
                values: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(RadialError::NonFiniteProfile);
        }
        let slopes = pchip_slopes(grid.nodes(), &values);
        Ok(RadialProfile {
            grid,
            values,
            slopes,
            extrapolation,
        })
    }

    pub fn from_fn(
        grid: Arc<RadialGrid>,
        extrapolation: Extrapolation,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, RadialError> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values, extrapolation)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> Arc<RadialGrid> {
        Arc::clone(&self.grid)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    /// Interpolated evaluation; continuous on `[0, r_max]`, extrapolation
    /// tag beyond.
    pub fn eval(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        if r >= self.grid.r_max() {
            let r_max = self.grid.r_max();
            return match self.extrapolation {
                Extrapolation::Zero => {
                    if r == r_max {
                        *self.values.last().unwrap()
                    } else {
                        0.0
                    }
                }
                Extrapolation::CoefOverR(c) => c / r,
                Extrapolation::CoefOverR2(c) => c / (r * r),
            };
        }
        let r = r.max(0.0);
        let k = self.grid.cell_of(r);
        let h = nodes[k + 1] - nodes[k];
        let t = (r - nodes[k]) / h;
        hermite(self.values[k], self.values[k + 1], self.slopes[k], self.slopes[k + 1], t, h)
    }

    /// Derivative of the interpolant (piecewise quadratic, may jump at
    /// nodes in the second derivative only).
    pub fn eval_derivative(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        if r >= self.grid.r_max() {
            return match self.extrapolation {
                Extrapolation::Zero => 0.0,
                Extrapolation::CoefOverR(c) => -c / (r * r),
                Extrapolation::CoefOverR2(c) => -2.0 * c / (r * r * r),
            };
        }
        let r = r.max(0.0);
        let k = self.grid.cell_of(r);
        let h = nodes[k + 1] - nodes[k];
        let t = (r - nodes[k]) / h;
        hermite_derivative(self.values[k], self.values[k + 1], self.slopes[k], self.slopes[k + 1], t, h)
    }

    /// Writes the `r,value` CSV representation.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,value")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(w, "{r},{v}")?;
        }
        Ok(())
    }

    /// Reads a profile from `r,value` CSV plus its extrapolation tag.
    pub fn read_csv<R: BufRead>(r: R, extrapolation: Extrapolation) -> Result<Self, RadialError> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| RadialError::Csv(e.to_string()))?;
            let line = line.trim();
            if i == 0 || line.is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| RadialError::Csv(format!("bad row: {line}")))?;
            nodes.push(a.trim().parse::<f64>().map_err(|e| RadialError::Csv(e.to_string()))?);
            values.push(b.trim().parse::<f64>().map_err(|e| RadialError::Csv(e.to_string()))?);
        }
        let grid = Arc::new(RadialGrid::new(nodes)?);
        Self::new(grid, values, extrapolation)
    }
}

fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, t: f64, h: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + h * m0 * (t3 - 2.0 * t2 + t)
        + h * m1 * (t3 - t2)
}

fn hermite_derivative(y0: f64, y1: f64, m0: f64, m1: f64, t: f64, h: f64) -> f64 {
    let t2 = t * t;
    (y0 * (6.0 * t2 - 6.0 * t) + y1 * (-6.0 * t2 + 6.0 * t)) / h
        + m0 * (3.0 * t2 - 4.0 * t + 1.0)
        + m1 * (3.0 * t2 - 2.0 * t)
}

/// Fritsch-Carlson monotone (shape-preserving) slopes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n - 1];
    let mut h = vec![0.0; n - 1];
    for k in 0..n - 1 {
        h[k] = x[k + 1] - x[k];
        d[k] = (y[k + 1] - y[k]) / h[k];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if d[k - 1] * d[k] <= 0.0 {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    m[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), d[0], d.get(1).copied().unwrap_or(d[0]));
    let last = n - 2;
    m[n - 1] = edge_slope(
        h[last],
        if last >= 1 { h[last - 1] } else { h[last] },
        d[last],
        if last >= 1 { d[last - 1] } else { d[last] },
    );
    m
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(1.0, n).unwrap())
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::new(vec![0.0, 1.0]).is_err());
        let mut nodes: Vec<f64> = (0..20).map(|i| i as f64).collect();
        nodes[0] = 0.5;
        assert!(RadialGrid::new(nodes).is_err());
        let mut nodes: Vec<f64> = (0..20).map(|i| i as f64).collect();
        nodes[7] = nodes[6];
        assert!(RadialGrid::new(nodes).is_err());
    }

    #[test]
    fn interpolation_reproduces_smooth_function() {
        let g = grid(128);
        let p = RadialProfile::from_fn(g, Extrapolation::Zero, |r| (3.0 * r).sin()).unwrap();
        // Monotone interpolation clamps slopes at extrema, so accuracy there
        // is second order in the spacing.
        for i in 0..400 {
            let r = i as f64 / 400.0;
            assert!((p.eval(r) - (3.0 * r).sin()).abs() < 1e-4, "r={r}");
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let g = grid(32);
        // Steep monotone data; plain cubic splines would overshoot.
        let p = RadialProfile::from_fn(g, Extrapolation::Zero, |r| {
            if r < 0.5 {
                0.0
            } else {
                (r - 0.5).powi(2)
            }
        })
        .unwrap();
        let mut prev = p.eval(0.0);
        for i in 1..=1000 {
            let v = p.eval(i as f64 / 1000.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn exterior_tail_follows_tag() {
        let g = grid(32);
        let p = RadialProfile::from_fn(g, Extrapolation::CoefOverR(-2.0), |r| r).unwrap();
        assert!((p.eval(4.0) + 0.5).abs() < 1e-15);
        assert!((p.eval_derivative(4.0) - 2.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(32);
        let p = RadialProfile::from_fn(g, Extrapolation::Zero, |r| r * r).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = RadialProfile::read_csv(std::io::Cursor::new(buf), Extrapolation::Zero).unwrap();
        assert_eq!(p.values(), q.values());
        assert_eq!(p.grid().nodes(), q.grid().nodes());
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = grid(32);
        let mut vals = vec![0.0; 32];
        vals[3] = f64::NAN;
        assert!(matches!(
            RadialProfile::new(g, vals, Extrapolation::Zero),
            Err(RadialError::NonFiniteProfile)
        ));
    }
}
