//! Onsager–Machlup weight of a discretised path,
//! `S = (1/4ηkT) ∫ |M R̈ + η Ṙ - E|² dτ`.
//!
//! Stencils: central differences inside, second-order one-sided at the two
//! ends (four points when available), trapezoid weights in time. Only
//! differences of `S` mean anything; no normalisation is attempted.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry;
use crate::langevin::{ForceMode, Trajectory};
use crate::params::{ModelParams, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathAction {
    pub action: f64,
    /// `M R̈_k + η Ṙ_k - E_k` at every node.
    pub residuals: Vec<Vec2>,
}

pub fn om_action(traj: &Trajectory, params: &ModelParams, mode: ForceMode) -> Result<PathAction> {
    let points: Vec<Vec2> = traj.positions().collect();
    om_action_points(&points, params, mode)
}

/// Action of positions sampled every `params.dt`.
pub fn om_action_points(points: &[Vec2], params: &ModelParams, mode: ForceMode) -> Result<PathAction> {
    let residuals = residuals(points, params, mode)?;
    let n = residuals.len() - 1;
    let h = params.dt;
    let sum: f64 = residuals
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let w = if k == 0 || k == n { 0.5 * h } else { h };
            w * r.norm_squared()
        })
        .sum();
    Ok(PathAction {
        action: sum / (4.0 * params.friction * params.kt),
        residuals,
    })
}

/// Interior-node part of the action, `(dt / 4ηkT) Σ_{0<k<n} |L R_k|²`.
///
/// For the lattice recursion of [`LatticeSampler`] this is exactly minus the
/// log density of the free nodes, up to a constant.
pub fn interior_action(points: &[Vec2], params: &ModelParams, mode: ForceMode) -> Result<f64> {
    let residuals = residuals(points, params, mode)?;
    let n = residuals.len() - 1;
    let sum: f64 = residuals[1..n].iter().map(|r| r.norm_squared()).sum();
    Ok(sum * params.dt / (4.0 * params.friction * params.kt))
}

fn residuals(x: &[Vec2], params: &ModelParams, mode: ForceMode) -> Result<Vec<Vec2>> {
    if params.kt <= 0.0 {
        return Err(Error::UndefinedMeasure);
    }
    if x.len() < 3 {
        return Err(Error::Domain(format!(
            "action needs at least 3 grid points, got {}",
            x.len()
        )));
    }
    let n = x.len() - 1;
    let h = params.dt;
    let (m, eta) = (params.mass, params.friction);
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let (acc, vel) = if k == 0 {
            let acc = if n >= 3 {
                (x[0] * 2.0 - x[1] * 5.0 + x[2] * 4.0 - x[3]) / (h * h)
            } else {
                (x[0] - x[1] * 2.0 + x[2]) / (h * h)
            };
            (acc, (x[0] * -3.0 + x[1] * 4.0 - x[2]) / (2.0 * h))
        } else if k == n {
            let acc = if n >= 3 {
                (x[n] * 2.0 - x[n - 1] * 5.0 + x[n - 2] * 4.0 - x[n - 3]) / (h * h)
            } else {
                (x[n] - x[n - 1] * 2.0 + x[n - 2]) / (h * h)
            };
            (acc, (x[n] * 3.0 - x[n - 1] * 4.0 + x[n - 2]) / (2.0 * h))
        } else {
            (
                (x[k + 1] - x[k] * 2.0 + x[k - 1]) / (h * h),
                (x[k + 1] - x[k - 1]) / (2.0 * h),
            )
        };
        let mut r = acc * m + vel * eta;
        if mode == ForceMode::Full {
            r -= geometry::electric_force(&x[k], params)?;
        }
        out.push(r);
    }
    Ok(out)
}

/// One-dimensional lattice Langevin recursion
/// `M (x_{k+1} - 2x_k + x_{k-1}) / dt² + η (x_{k+1} - x_{k-1}) / (2dt) = F_k`
/// with `F_k ~ N(0, 2ηkT/dt)` i.i.d. The two initial nodes are fixed.
///
/// `noise_friction` is the friction used to draw `F_k` and to solve the
/// recursion; leaving it equal to `params.friction` makes `exp(-S_interior)`
/// the exact density. Anything else is a deliberately broken sampler.
#[derive(Debug, Clone)]
pub struct LatticeSampler {
    pub params: ModelParams,
    pub noise_friction: f64,
    pub x0: f64,
    pub x1: f64,
    pub free_nodes: usize,
}

impl LatticeSampler {
    pub fn new(params: ModelParams, free_nodes: usize) -> Self {
        LatticeSampler {
            noise_friction: params.friction,
            params,
            x0: 0.0,
            x1: 0.0,
            free_nodes,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec2> {
        let p = &self.params;
        let (h, m, eta) = (p.dt, p.mass, self.noise_friction);
        let sd = (2.0 * eta * p.kt / h).sqrt();
        let lead = m / (h * h) + eta / (2.0 * h);
        let mut x = Vec::with_capacity(self.free_nodes + 2);
        x.push(self.x0);
        x.push(self.x1);
        for k in 1..=self.free_nodes {
            let f = sd * rng.sample::<f64, _>(StandardNormal);
            let next = (f + m * (2.0 * x[k] - x[k - 1]) / (h * h) + eta * x[k - 1] / (2.0 * h)) / lead;
            x.push(next);
        }
        x.into_iter().map(|v| Vec2::new(v, 0.0)).collect()
    }
}

/// Exact transition density pieces of the damped free particle in 1D, used
/// as the reference for the action.
pub mod exact {
    use nalgebra::{Matrix2, Vector2};

    /// Log density (up to a path-independent constant) of the joint
    /// position-velocity path `(x_k, v_k)` under the exact Gaussian step.
    pub fn log_density(xs: &[f64], vs: &[f64], mass: f64, friction: f64, kt: f64, dt: f64) -> f64 {
        let g = friction / mass;
        let q = 2.0 * friction * kt;
        let a = g * dt;
        let e = (-a).exp();
        let m2 = mass * mass;
        let vv = q / m2 * (1.0 - (-2.0 * a).exp()) / (2.0 * g);
        let vx = q / m2 * (1.0 - e).powi(2) / (2.0 * g * g);
        let xx = q / m2 * (dt - 2.0 * (1.0 - e) / g + (1.0 - (-2.0 * a).exp()) / (2.0 * g)) / (g * g);
        let inv = Matrix2::new(xx, vx, vx, vv)
            .try_inverse()
            .expect("step covariance is positive definite");
        let mut total = 0.0;
        for k in 0..xs.len() - 1 {
            let mean = Vector2::new(xs[k] + vs[k] * (1.0 - e) / g, vs[k] * e);
            let z = Vector2::new(xs[k + 1], vs[k + 1]) - mean;
            total -= 0.5 * z.dot(&(inv * z));
        }
        total
    }
}
