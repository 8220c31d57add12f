//! Monotone maps with generalized (right-continuous) inverses.

use super::RadialError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// A piecewise-linear monotone function given by breakpoints and ordinates.
/// Flat stretches are allowed; the generalized inverse maps a flat value to
/// the left endpoint of its plateau.
#[derive(Debug, Clone)]
pub struct MonotoneMap {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    direction: Direction,
}

impl MonotoneMap {
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        direction: Direction,
    ) -> Result<Self, RadialError> {
        if breakpoints.len() != values.len() || breakpoints.len() < 2 {
            return Err(RadialError::LengthMismatch {
                grid: breakpoints.len(),
                values: values.len(),
            });
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RadialError::GridNotIncreasing);
        }
        let ok = match direction {
            Direction::Increasing => values.windows(2).all(|w| w[1] >= w[0]),
            Direction::Decreasing => values.windows(2).all(|w| w[1] <= w[0]),
        };
        if !ok || !values.iter().all(|v| v.is_finite()) {
            return Err(RadialError::NotMonotone);
        }
        Ok(MonotoneMap {
            breakpoints,
            values,
            direction,
        })
    }

    /// Re-checks monotonicity of raw data, flattening ties in the declared
    /// direction (any decrease of an increasing map is clipped, and vice
    /// versa).
    pub fn new_flattened(breakpoints: Vec<f64>, mut values: Vec<f64>, direction: Direction) -> Result<Self, RadialError> {
        for i in 1..values.len() {
            match direction {
                Direction::Increasing => {
                    if values[i] < values[i - 1] {
                        values[i] = values[i - 1];
                    }
                }
                Direction::Decreasing => {
                    if values[i] > values[i - 1] {
                        values[i] = values[i - 1];
                    }
                }
            }
        }
        Self::new(breakpoints, values, direction)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Piecewise-linear evaluation, clamped outside the breakpoint range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.breakpoints.len();
        if x <= self.breakpoints[0] {
            return self.values[0];
        }
        if x >= self.breakpoints[n - 1] {
            return self.values[n - 1];
        }
        let k = self.breakpoints.partition_point(|&b| b <= x) - 1;
        let t = (x - self.breakpoints[k]) / (self.breakpoints[k + 1] - self.breakpoints[k]);
        self.values[k] + t * (self.values[k + 1] - self.values[k])
    }

    /// Generalized inverse. Returns the abscissa together with a flag that is
    /// set when `y` fell outside the range and was clamped to an endpoint.
    ///
    /// Where the map is strictly monotone this is the exact inverse; a value
    /// attained on a plateau maps to the smallest abscissa of the plateau.
    pub fn invert(&self, y: f64) -> (f64, bool) {
        let n = self.values.len();
        let (lo, hi) = match self.direction {
            Direction::Increasing => (self.values[0], self.values[n - 1]),
            Direction::Decreasing => (self.values[n - 1], self.values[0]),
        };
        if y < lo {
            let clamped_x = match self.direction {
                Direction::Increasing => self.breakpoints[0],
                Direction::Decreasing => self.breakpoints[n - 1],
            };
            return (clamped_x, true);
        }
        if y > hi {
            let clamped_x = match self.direction {
                Direction::Increasing => self.breakpoints[n - 1],
                Direction::Decreasing => self.breakpoints[0],
            };
            return (clamped_x, true);
        }
        // First segment whose far endpoint reaches y.
        let k = match self.direction {
            Direction::Increasing => self.values.partition_point(|&v| v < y),
            Direction::Decreasing => self.values.partition_point(|&v| v > y),
        };
        if k == 0 {
            return (self.breakpoints[0], false);
        }
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        if v0 == y {
            // Walk back to the smallest abscissa attaining y (plateau rule).
            let mut j = k - 1;
            while j > 0 && self.values[j - 1] == y {
                j -= 1;
            }
            return (self.breakpoints[j], false);
        }
        let t = (y - v0) / (v1 - v0);
        (
            self.breakpoints[k - 1] + t * (self.breakpoints[k] - self.breakpoints[k - 1]),
            false,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inverts_exactly() {
        let x: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let m = MonotoneMap::new(x.clone(), x, Direction::Increasing).unwrap();
        let (v, clamped) = m.invert(0.3);
        assert!((v - 0.3).abs() < 1e-15);
        assert!(!clamped);
    }

    #[test]
    fn constant_map_returns_smallest_abscissa() {
        let m = MonotoneMap::new(vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0], Direction::Increasing)
            .unwrap();
        let (v, clamped) = m.invert(5.0);
        assert_eq!(v, 1.0);
        assert!(!clamped);
    }

    #[test]
    fn square_function_inverts_analytically() {
        let x: Vec<f64> = (0..=300).map(|i| i as f64 / 100.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let m = MonotoneMap::new(x, y, Direction::Increasing).unwrap();
        let (v, clamped) = m.invert(4.0);
        assert!((v - 2.0).abs() < 1e-12);
        assert!(!clamped);
    }

    #[test]
    fn out_of_range_clamps_and_flags() {
        let m = MonotoneMap::new(vec![0.0, 1.0], vec![0.0, 1.0], Direction::Increasing).unwrap();
        assert_eq!(m.invert(2.0), (1.0, true));
        assert_eq!(m.invert(-1.0), (0.0, true));
        let d = MonotoneMap::new(vec![0.0, 1.0], vec![1.0, 0.0], Direction::Decreasing).unwrap();
        assert_eq!(d.invert(2.0), (0.0, true));
        assert_eq!(d.invert(-1.0), (1.0, true));
    }

    #[test]
    fn decreasing_map_inverts() {
        let x: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        let m = MonotoneMap::new(x, y, Direction::Decreasing).unwrap();
        let (v, _) = m.invert(0.25);
        assert!((v - 0.75).abs() < 1e-14);
    }

    #[test]
    fn flattening_clips_ties() {
        let m = MonotoneMap::new_flattened(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![0.0, 1.0, 0.9, 2.0],
            Direction::Increasing,
        )
        .unwrap();
        assert_eq!(m.values(), &[0.0, 1.0, 1.0, 2.0]);
    }
}
