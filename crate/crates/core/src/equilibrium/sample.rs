//! Monte Carlo sampling of a steady state into a particle ensemble.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EquilibriumModel;
use crate::dynamics::ParticleEnsemble;
use crate::exec;
use crate::radial::{Direction, MonotoneMap};

/// Draws `n` equal-weight samples of the model distribution, deterministic
/// for a given seed. Each particle owns a counter-based RNG stream, so the
/// result is independent of thread scheduling.
///
/// Radii invert the cumulative mass profile; at fixed radius the speed is
/// drawn by rejection of `w² F(w²/2 + φ(r))` under a flat envelope, and the
/// direction is isotropic.
pub fn sample_particles(model: &EquilibriumModel, n: usize, seed: u64) -> ParticleEnsemble {
    assert!(n >= 1);
    let weight = model.mass() / n as f64;

    // Cumulative mass fraction on the model grid.
    let nodes = model.dphi().grid().nodes();
    let fractions: Vec<f64> = nodes
        .iter()
        .map(|&r| (model.mass_within(r) / model.mass()).clamp(0.0, 1.0))
        .collect();
    let mass_map = MonotoneMap::new_flattened(nodes.to_vec(), fractions, Direction::Increasing)
        .expect("cumulative mass is monotone");

    let draws: Vec<([f64; 3], [f64; 3])> = exec::map_indexed(n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let (r, _) = mass_map.invert(rng.random::<f64>());
        let depth = model.depth_at(r);
        let w_max = (2.0 * depth).sqrt();
        let f_env = model.law().f_of_depth(depth);
        let w = if w_max > 0.0 && f_env > 0.0 {
            loop {
                let w = w_max * rng.random::<f64>();
                let y = rng.random::<f64>() * w_max * w_max * f_env;
                let f = model.law().f_of_depth(depth - 0.5 * w * w);
                if y <= w * w * f {
                    break w;
                }
            }
        } else {
            0.0
        };
        let x_dir = isotropic(&mut rng);
        let v_dir = isotropic(&mut rng);
        (
            [r * x_dir[0], r * x_dir[1], r * x_dir[2]],
            [w * v_dir[0], w * v_dir[1], w * v_dir[2]],
        )
    });

    let positions = draws.iter().map(|d| d.0).collect();
    let velocities = draws.iter().map(|d| d.1).collect();
    ParticleEnsemble::new(positions, velocities, vec![weight; n])
        .expect("sampled state is finite")
}

fn isotropic(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let az = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    let s = (1.0 - z * z).sqrt();
    [s * az.cos(), s * az.sin(), z]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{build_equilibrium, AnsatzLaw};
    use crate::radial::RadialGrid;

    fn model() -> EquilibriumModel {
        let law = AnsatzLaw::polytrope(1.0, 1.0).unwrap();
        build_equilibrium(&law, 1.0, &RadialGrid::uniform(10.0, 512).unwrap()).unwrap()
    }

    #[test]
    fn mass_and_support_constraints() {
        let m = model();
        let e = sample_particles(&m, 20_000, 7);
        assert!((e.total_mass() - m.mass()).abs() < 1e-12 * m.mass());
        // Every sample below the cutoff energy.
        for i in 0..e.len() {
            let en = 0.5 * e.speed(i).powi(2) + m.phi().eval(e.radius(i));
            assert!(en < m.e0() + 1e-12);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let m = model();
        let a = sample_particles(&m, 500, 42);
        let b = sample_particles(&m, 500, 42);
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.velocities, b.velocities);
        let c = sample_particles(&m, 500, 43);
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn empirical_hamiltonian_within_monte_carlo_error() {
        let m = model();
        let n = 100_000;
        let e = sample_particles(&m, n, 11);
        // Estimator Σ w (|v|²/2 + φ(r)/2) has expectation H(f0); its σ is
        // estimated from the sample itself.
        let per: Vec<f64> = (0..n)
            .map(|i| 0.5 * e.speed(i).powi(2) + 0.5 * m.phi().eval(e.radius(i)))
            .collect();
        let mean = per.iter().sum::<f64>() / n as f64;
        let var = per.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let h_hat = m.mass() * mean;
        let sigma = m.mass() * (var / n as f64).sqrt();
        let h = m.hamiltonian();
        assert!(
            (h_hat - h).abs() < 3.0 * sigma,
            "h_hat={h_hat}, h={h}, sigma={sigma}"
        );
    }
}
