//! Time integration of the linearized flow by characteristic markers.
//!
//! Markers move in the frozen steady field (kick-drift-kick, which
//! preserves their energies to second order without secular drift); the
//! carried fluctuation values are updated by the source term
//! `F'(E) φ_h'(r) (x·v)/r` in Strang order. Phase-space integrals are
//! invariant sums over markers with fixed Liouville weights.

use std::f64::consts::PI;
use std::sync::Arc;

use super::field::PerturbationField;
use super::LinearizedError;
use crate::equilibrium::EquilibriumModel;
use crate::exec;
use crate::radial::{solve_radial_field, Extrapolation, RadialGrid, RadialProfile};

#[derive(Debug, Clone)]
pub struct LinearizedTrace {
    pub times: Vec<f64>,
    pub free_energy: Vec<f64>,
}

#[doc(hidden)]
#[derive(Debug, Clone, Default)]
pub struct LinearizedTraceDebug {
    pub times: Vec<f64>,
    pub free_energy: Vec<f64>,
    pub term1: Vec<f64>,
    pub field_term: Vec<f64>,
}

#[doc(hidden)]
pub fn evolve_linearized_debug(
    h0: &PerturbationField,
    model: &EquilibriumModel,
    dt: f64,
    t_end: f64,
    cadence: usize,
) -> Result<LinearizedTraceDebug, LinearizedError> {
    let mut out = LinearizedTraceDebug::default();
    let trace = evolve_impl(h0, model, dt, t_end, cadence, Some(&mut out))?;
    out.times = trace.times;
    out.free_energy = trace.free_energy;
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Marker {
    x: [f64; 3],
    v: [f64; 3],
    h: f64,
    weight: f64,
}

/// Advances a spherically symmetric fluctuation for `t_end` with step `dt`,
/// recording the free energy every `cadence` steps.
pub fn evolve_linearized(
    h0: &PerturbationField,
    model: &EquilibriumModel,
    dt: f64,
    t_end: f64,
    cadence: usize,
) -> Result<LinearizedTrace, LinearizedError> {
    evolve_impl(h0, model, dt, t_end, cadence, None)
}

fn evolve_impl(
    h0: &PerturbationField,
    model: &EquilibriumModel,
    dt: f64,
    t_end: f64,
    cadence: usize,
    mut debug: Option<&mut LinearizedTraceDebug>,
) -> Result<LinearizedTrace, LinearizedError> {
    let t_dyn = model.dynamical_time();
    if !(dt > 0.0) || dt > 0.05 * t_dyn {
        return Err(LinearizedError::CflViolation {
            dt,
            suggested: t_dyn / 200.0,
        });
    }
    super::bracket::check_support(h0, model)?;

    // Markers on the populated grid nodes; planar embedding
    // x = (0, 0, r), v = w(s, 0, c) represents (r, w, c) faithfully.
    let grid = &h0.grid;
    let mut markers: Vec<Marker> = Vec::new();
    for idx in 0..grid.cells() {
        let (i, j, k) = grid.split(idx);
        let (r, w, c) = (grid.r(i), grid.w(j), grid.c(k));
        let e = 0.5 * w * w + model.phi().eval(r);
        if e >= model.e0() {
            continue;
        }
        let s = (1.0 - c * c).max(0.0).sqrt();
        markers.push(Marker {
            x: [0.0, 0.0, r],
            v: [w * s, 0.0, w * c],
            h: h0.values[idx],
            weight: grid.node_weight(i, j, k),
        });
    }
    if markers.is_empty() {
        return Err(LinearizedError::InaccessibleSupport);
    }

    let shells = Arc::new(RadialGrid::uniform(1.02 * model.support_radius(), 193)?);
    let steps = (t_end / dt).ceil() as usize;
    let mut times = Vec::new();
    let mut free_energy = Vec::new();

    let record = |markers: &[Marker],
                      t: f64,
                      times: &mut Vec<f64>,
                      fe: &mut Vec<f64>,
                      debug: &mut Option<&mut LinearizedTraceDebug>|
     -> Result<(), LinearizedError> {
        let field = fluctuation_field(markers, model, &shells)?;
        let term1 = exec::sum_indexed(markers.len(), |m| {
            let mk = &markers[m];
            let fp = model.fprime_at_energy(energy(model, mk));
            if fp < 0.0 {
                -mk.h * mk.h / fp * mk.weight
            } else {
                0.0
            }
        });
        let grad_sq = -exec::sum_indexed(markers.len(), |m| {
            let mk = &markers[m];
            lerp_nodes(&field.phi, radius(mk)) * mk.h * mk.weight
        });
        times.push(t);
        fe.push(term1 - grad_sq);
        if let Some(d) = debug.as_deref_mut() {
            d.term1.push(term1);
            d.field_term.push(grad_sq);
        }
        Ok(())
    };

    record(&markers, 0.0, &mut times, &mut free_energy, &mut debug)?;

    for step in 1..=steps {
        // Strang: half source, frozen-field transport, half source.
        let field = fluctuation_field(&markers, model, &shells)?;
        markers = exec::map_collect(&markers, |mk| {
            let mut mk = *mk;
            apply_source(&mut mk, model, &field.dphi, 0.5 * dt);
            leapfrog(&mut mk, model, dt);
            mk
        });
        let field = fluctuation_field(&markers, model, &shells)?;
        markers = exec::map_collect(&markers, |mk| {
            let mut mk = *mk;
            apply_source(&mut mk, model, &field.dphi, 0.5 * dt);
            mk
        });
        if step % cadence == 0 || step == steps {
            record(&markers, step as f64 * dt, &mut times, &mut free_energy, &mut debug)?;
        }
    }
    Ok(LinearizedTrace { times, free_energy })
}

fn radius(mk: &Marker) -> f64 {
    (mk.x[0] * mk.x[0] + mk.x[1] * mk.x[1] + mk.x[2] * mk.x[2]).sqrt()
}

fn energy(model: &EquilibriumModel, mk: &Marker) -> f64 {
    let w2 = mk.v[0] * mk.v[0] + mk.v[1] * mk.v[1] + mk.v[2] * mk.v[2];
    0.5 * w2 + model.phi().eval(radius(mk))
}

fn apply_source(mk: &mut Marker, model: &EquilibriumModel, dphi_h: &RadialProfile, dt: f64) {
    let r = radius(mk);
    if r == 0.0 {
        return;
    }
    let xv = mk.x[0] * mk.v[0] + mk.x[1] * mk.v[1] + mk.x[2] * mk.v[2];
    let fp = model.fprime_at_energy(energy(model, mk));
    mk.h += dt * fp * lerp_nodes(dphi_h, r) * xv / r;
}

fn leapfrog(mk: &mut Marker, model: &EquilibriumModel, dt: f64) {
    let acc = |x: &[f64; 3]| -> [f64; 3] {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r == 0.0 {
            return [0.0; 3];
        }
        let g = -model.dphi().eval(r) / r;
        [g * x[0], g * x[1], g * x[2]]
    };
    let a0 = acc(&mk.x);
    for d in 0..3 {
        mk.v[d] += 0.5 * dt * a0[d];
        mk.x[d] += dt * mk.v[d];
    }
    let a1 = acc(&mk.x);
    for d in 0..3 {
        mk.v[d] += 0.5 * dt * a1[d];
    }
}

struct FluctuationField {
    phi: RadialProfile,
    dphi: RadialProfile,
}

/// Linear interpolation on the uniform shell nodes, consistent with the
/// cloud-in-cell deposition shape.
fn lerp_nodes(profile: &RadialProfile, r: f64) -> f64 {
    let nodes = profile.grid().nodes();
    let n = nodes.len();
    let dr = nodes[1] - nodes[0];
    if r >= nodes[n - 1] {
        return profile.eval(r);
    }
    let pos = (r / dr).min((n - 1) as f64 - 1e-12);
    let k = pos as usize;
    let t = pos - k as f64;
    profile.values()[k] * (1.0 - t) + profile.values()[k + 1] * t
}

/// Fluctuation density by linear (cloud-in-cell) deposition onto the shell
/// nodes, which keeps the field smooth as markers cross shells.
fn fluctuation_field(
    markers: &[Marker],
    _model: &EquilibriumModel,
    shells: &Arc<RadialGrid>,
) -> Result<FluctuationField, LinearizedError> {
    let nodes = shells.nodes();
    let n = nodes.len();
    let dr = nodes[1] - nodes[0];
    // Two histogram slots per marker: the bracketing nodes.
    let deposits: Vec<(usize, f64, f64)> = markers
        .iter()
        .map(|mk| {
            let r = radius(mk);
            let pos = (r / dr).min((n - 1) as f64 - 1e-9);
            let k = pos as usize;
            let frac = pos - k as f64;
            (k, (1.0 - frac) * mk.h * mk.weight, frac * mk.h * mk.weight)
        })
        .collect();
    let mut charge = exec::histogram(&deposits, n + 1, |&(k, lo, _)| Some((k, lo)));
    let hi = exec::histogram(&deposits, n + 1, |&(k, _, hi)| Some((k + 1, hi)));
    for (c, h) in charge.iter_mut().zip(&hi) {
        *c += h;
    }
    charge.truncate(n);
    // Node control volumes: half-shells around each node.
    let values: Vec<f64> = charge
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let lo = if k == 0 { 0.0 } else { nodes[k] - 0.5 * dr };
            let hi = if k == n - 1 {
                nodes[k]
            } else {
                nodes[k] + 0.5 * dr
            };
            let vol = 4.0 * PI / 3.0 * (hi.powi(3) - lo.powi(3));
            m / vol
        })
        .collect();
    let rho = RadialProfile::new(Arc::clone(shells), values, Extrapolation::Zero)?;
    let sol = solve_radial_field(&rho)?;
    Ok(FluctuationField {
        phi: sol.phi,
        dphi: sol.dphi,
    })
}
