//! Node-count experiments: redundancy landscapes over rotation angles and
//! node-count growth along a time evolution.

use crate::dd::{Config, Manager};
use crate::error::{Error, Result};
use crate::models::{circuit_from_angles, trotter_step_circuit, ApplyStrategy, ModelFamily, ModelSpec};

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn grid_points(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidPlan(format!("grid needs at least 2 points per axis, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidPlan(format!("angle range [{lo}, {hi}] is empty")));
    }
    Ok((0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            lo * (1.0 - f) + hi * f
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapePoint {
    pub theta_single: f64,
    pub theta_two: f64,
    pub trotter_steps: usize,
    pub node_count: usize,
}

/// Node counts of `|0...0>` after `1..=max_steps` repetitions of the
/// circuit with the given raw angles. Runs in its own context.
pub fn landscape_point(
    family: ModelFamily,
    sites: usize,
    max_steps: usize,
    theta_single: f64,
    theta_two: f64,
    config: Config,
) -> Result<Vec<LandscapePoint>> {
    let circuit = circuit_from_angles(family, sites, theta_single, theta_two)?;
    let mut m = Manager::new(config);
    let mut s = m.zero_state(sites)?;
    let mut out = Vec::with_capacity(max_steps);
    for n in 1..=max_steps {
        s = m.apply_circuit_with(&s, &circuit, ApplyStrategy::Layered)?;
        out.push(LandscapePoint { theta_single, theta_two, trotter_steps: n, node_count: m.node_count(s.root) });
    }
    Ok(out)
}

/// Full landscape in grid order: `theta_single` outer, `theta_two` inner,
/// step count innermost.
pub fn landscape(
    family: ModelFamily,
    sites: usize,
    max_steps: usize,
    singles: &[f64],
    twos: &[f64],
    config: Config,
) -> Result<Vec<LandscapePoint>> {
    let mut out = Vec::with_capacity(singles.len() * twos.len() * max_steps);
    for &a in singles {
        for &b in twos {
            out.extend(landscape_point(family, sites, max_steps, a, b, config)?);
        }
    }
    Ok(out)
}

/// Node count of the evolved state after each of `0..=steps` Trotter steps
/// from `|0...0>`.
pub fn scaling_series(model: &ModelSpec, dt: f64, steps: usize, config: Config) -> Result<Vec<usize>> {
    let circuit = trotter_step_circuit(model, dt)?;
    let mut m = Manager::new(config);
    let mut s = m.zero_state(model.sites)?;
    m.retain(s.root);
    let mut out = vec![m.node_count(s.root)];
    for _ in 0..steps {
        let next = m.apply_circuit_with(&s, &circuit, ApplyStrategy::Layered)?;
        m.retain(next.root);
        m.release(s.root);
        s = next;
        m.maybe_collect();
        out.push(m.node_count(s.root));
    }
    Ok(out)
}
