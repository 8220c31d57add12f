//! Weighted phase-space samples carrying a distribution function.

use std::io::{Read, Write};

use super::DynamicsError;

/// `N` weighted markers `(x_i, v_i, w_i)`. Weights are fixed at creation and
/// never change during evolution, so the represented mass is conserved
/// exactly.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub time: f64,
}

impl ParticleEnsemble {
    pub fn new(
        positions: Vec<[f64; 3]>,
        velocities: Vec<[f64; 3]>,
        weights: Vec<f64>,
    ) -> Result<Self, DynamicsError> {
        if positions.len() != velocities.len() || positions.len() != weights.len() {
            return Err(DynamicsError::LengthMismatch);
        }
        let finite = positions
            .iter()
            .chain(velocities.iter())
            .flatten()
            .all(|c| c.is_finite())
            && weights.iter().all(|w| w.is_finite() && *w > 0.0);
        if !finite {
            return Err(DynamicsError::NonFiniteState { time: 0.0 });
        }
        Ok(ParticleEnsemble {
            positions,
            velocities,
            weights,
            time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        crate::exec::sum_indexed(self.len(), |i| self.weights[i])
    }

    pub fn radius(&self, i: usize) -> f64 {
        let x = self.positions[i];
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    pub fn speed(&self, i: usize) -> f64 {
        let v = self.velocities[i];
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    /// Kinetic energy `Σ w_i |v_i|²/2`.
    pub fn kinetic_energy(&self) -> f64 {
        crate::exec::sum_indexed(self.len(), |i| {
            let v = self.velocities[i];
            0.5 * self.weights[i] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        })
    }

    /// Mass centroid.
    pub fn centroid(&self) -> [f64; 3] {
        let m = self.total_mass();
        let mut c = [0.0; 3];
        for a in 0..3 {
            c[a] = crate::exec::sum_indexed(self.len(), |i| self.weights[i] * self.positions[i][a])
                / m;
        }
        c
    }

    /// Total momentum `Σ w_i v_i`.
    pub fn momentum(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for a in 0..3 {
            p[a] =
                crate::exec::sum_indexed(self.len(), |i| self.weights[i] * self.velocities[i][a]);
        }
        p
    }

    pub fn all_finite(&self) -> bool {
        self.positions
            .iter()
            .chain(self.velocities.iter())
            .flatten()
            .all(|c| c.is_finite())
    }

    /// Binary snapshot: header `(N: u64, t: f64, M: f64)` followed by the
    /// flattened `x`, `v`, `w` arrays as little-endian 8-byte floats.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.time.to_le_bytes())?;
        w.write_all(&self.total_mass().to_le_bytes())?;
        for x in &self.positions {
            for c in x {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        for v in &self.velocities {
            for c in v {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        for wt in &self.weights {
            w.write_all(&wt.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self, DynamicsError> {
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf).map_err(DynamicsError::Io)?;
        let n = u64::from_le_bytes(u64buf) as usize;
        let mut f64buf = [0u8; 8];
        let mut next = |r: &mut R| -> Result<f64, DynamicsError> {
            r.read_exact(&mut f64buf).map_err(DynamicsError::Io)?;
            Ok(f64::from_le_bytes(f64buf))
        };
        let time = next(&mut r)?;
        let _mass = next(&mut r)?;
        let mut positions = vec![[0.0; 3]; n];
        let mut velocities = vec![[0.0; 3]; n];
        let mut weights = vec![0.0; n];
        for x in positions.iter_mut() {
            for c in x.iter_mut() {
                *c = next(&mut r)?;
            }
        }
        for v in velocities.iter_mut() {
            for c in v.iter_mut() {
                *c = next(&mut r)?;
            }
        }
        for w in weights.iter_mut() {
            *w = next(&mut r)?;
        }
        let mut e = ParticleEnsemble::new(positions, velocities, weights)?;
        e.time = time;
        Ok(e)
    }

    /// CSV export `x,y,z,vx,vy,vz,w`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,z,vx,vy,vz,w")?;
        for i in 0..self.len() {
            let x = self.positions[i];
            let v = self.velocities[i];
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                x[0], x[1], x[2], v[0], v[1], v[2], self.weights[i]
            )?;
        }
        Ok(())
    }
}
