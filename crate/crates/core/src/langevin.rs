//! Langevin dynamics `M R̈ = -η Ṙ [+ E(R)] + F(t)` of the slow coordinate in
//! the punctured plane, with `<F_i(t) F_j(s)> = 2ηkT δ_ij δ(t - s)`.
//!
//! One step is a symmetric splitting: a half-kick from the electric force
//! (full mode only), the exact Gaussian solution of the linear damped
//! dynamics over `dt` for position and velocity jointly, and a second
//! half-kick. The linear part carries all of the damping and noise, so the
//! force-free dynamics is sampled without discretisation error at any `dt`.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::params::{ModelParams, Vec2};

/// Below this value of `η dt / M` the position variance uses its series.
const SERIES_CUTOFF: f64 = 1e-3;
/// Stability guard on `η dt / M`.
const MAX_DAMPING_PER_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForceMode {
    /// Electric force dropped: free Brownian motion in the punctured plane.
    /// All closed-form predictions assume this mode.
    #[default]
    Simplified,
    /// Keeps the repulsive `ħ² R̂ / (M R³)` force.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialVelocity {
    /// Stationary Maxwell draw with per-component variance `kT / M`.
    #[default]
    Maxwell,
    /// `Ṙ₀(-T/2)` of the noiseless boundary-value solution, so that the mean
    /// path is `R₀(t)`.
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub mode: ForceMode,
    pub initial_velocity: InitialVelocity,
    pub record_noise: bool,
    /// Noise redraws allowed for a single step before the path is aborted.
    pub max_redraws: usize,
    /// Total puncture events allowed along one path.
    pub puncture_limit: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            mode: ForceMode::Simplified,
            initial_velocity: InitialVelocity::Maxwell,
            record_noise: false,
            max_redraws: 100,
            puncture_limit: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub t: f64,
    pub r: Vec2,
    pub v: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub states: Vec<PhaseState>,
    /// Mean stochastic force over each step; `noise[k]` acted on
    /// `[t_k, t_{k+1}]`.
    pub noise: Option<Vec<Vec2>>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.params.dt
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> &PhaseState {
        &self.states[0]
    }

    pub fn last(&self) -> &PhaseState {
        &self.states[self.states.len() - 1]
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.states.iter().map(|s| s.r)
    }

    /// Smallest `|R|` visited.
    pub fn min_radius(&self) -> f64 {
        self.states.iter().map(|s| s.r.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Writes `t,Rx,Ry,vx,vy[,Fx,Fy]` with 17 significant digits. The force
    /// columns of the final row are empty since no step starts there.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let with_noise = self.noise.is_some();
        if with_noise {
            writeln!(out, "t,Rx,Ry,vx,vy,Fx,Fy")?;
        } else {
            writeln!(out, "t,Rx,Ry,vx,vy")?;
        }
        for (k, s) in self.states.iter().enumerate() {
            write!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.r.x, s.r.y, s.v.x, s.v.y
            )?;
            if let Some(noise) = &self.noise {
                match noise.get(k) {
                    Some(f) => write!(out, ",{:.16e},{:.16e}", f.x, f.y)?,
                    None => write!(out, ",,")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Precomputed coefficients for one integration step.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    params: &'a ModelParams,
    mode: ForceMode,
    decay: f64,
    drift: f64,
    /// Cholesky factor of the (dV, dX) noise covariance, already scaled.
    chol: [f64; 3],
}

/// Result of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: PhaseState,
    /// Mean stochastic force over the step.
    pub force: Vec2,
    /// Rejected proposals before acceptance.
    pub redraws: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(params: &'a ModelParams, mode: ForceMode) -> Result<Self> {
        let h = params.dt;
        let gamma = params.omega_r();
        let a = gamma * h;
        if !(a < MAX_DAMPING_PER_STEP) {
            return Err(Error::Stability { ratio: a });
        }
        let em1 = (-a).exp_m1();
        let decay = 1.0 + em1;
        let drift = h * (-em1 / a);

        let phi1 = -(-2.0 * a).exp_m1() / (2.0 * a);
        let phi2 = 0.5 * (em1 / a).powi(2);
        let phi3 = if a < SERIES_CUTOFF {
            1.0 / 3.0 - a / 4.0 + 7.0 * a * a / 60.0 - a * a * a / 24.0
        } else {
            (a - 2.0 * (1.0 - decay) + 0.5 * (1.0 - decay * decay)) / (a * a * a)
        };
        let c11 = phi1.sqrt();
        let c21 = phi2 / c11;
        let c22 = (phi3 - c21 * c21).max(0.0).sqrt();
        let s = (2.0 * params.friction * params.kt).sqrt() / params.mass;
        let chol = [s * h.sqrt() * c11, s * h.powf(1.5) * c21, s * h.powf(1.5) * c22];
        Ok(Stepper {
            params,
            mode,
            decay,
            drift,
            chol,
        })
    }

    pub fn params(&self) -> &ModelParams {
        self.params
    }

    fn half_kick(&self, r: &Vec2) -> Result<Vec2> {
        match self.mode {
            ForceMode::Simplified => Ok(Vec2::zeros()),
            ForceMode::Full => {
                Ok(geometry::electric_force(r, self.params)? * (0.5 * self.params.dt / self.params.mass))
            }
        }
    }

    /// Deterministic part of a step given four standard normals
    /// `(x: u1, u2, y: u1, u2)`. Returns the new position, velocity and mean
    /// force, or `None` when the straight-line move touches the puncture.
    pub fn propose(&self, state: &PhaseState, z: [f64; 4]) -> Result<Option<(Vec2, Vec2, Vec2)>> {
        let p = self.params;
        let v_half = state.v + self.half_kick(&state.r)?;
        let dv = Vec2::new(self.chol[0] * z[0], self.chol[0] * z[2]);
        let dx = Vec2::new(
            self.chol[1] * z[0] + self.chol[2] * z[1],
            self.chol[1] * z[2] + self.chol[2] * z[3],
        );
        let r_new = state.r + v_half * self.drift + dx;
        if segment_distance_to_origin(&state.r, &r_new) <= p.puncture_radius {
            return Ok(None);
        }
        let v_new = v_half * self.decay + dv + self.half_kick(&r_new)?;
        let force = (dv * p.mass + dx * p.friction) / p.dt;
        Ok(Some((r_new, v_new, force)))
    }

    /// Advances one step, redrawing the noise (same state) when the move
    /// would cross the puncture.
    pub fn advance<R: Rng + ?Sized>(&self, state: &PhaseState, rng: &mut R, max_redraws: usize) -> Result<StepOutcome> {
        for redraws in 0..=max_redraws {
            let z = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            if let Some((r, v, force)) = self.propose(state, z)? {
                return Ok(StepOutcome {
                    state: PhaseState {
                        t: state.t + self.params.dt,
                        r,
                        v,
                    },
                    force,
                    redraws,
                });
            }
        }
        Err(Error::SimulationAborted {
            step: 0,
            events: max_redraws + 1,
        })
    }
}

/// Single step with freshly built coefficients; see [`Stepper`] for loops.
pub fn step<R: Rng + ?Sized>(
    state: &PhaseState,
    params: &ModelParams,
    mode: ForceMode,
    rng: &mut R,
) -> Result<PhaseState> {
    geometry::checked_radius(&state.r, params)?;
    let stepper = Stepper::new(params, mode)?;
    Ok(stepper.advance(state, rng, SimOptions::default().max_redraws)?.state)
}

/// Forward simulation from `R_i` over `[-T/2, T/2]`. The endpoint is free.
pub fn simulate<R: Rng + ?Sized>(params: &ModelParams, opts: &SimOptions, rng: &mut R) -> Result<Trajectory> {
    params.validate()?;
    let stepper = Stepper::new(params, opts.mode)?;
    let v0 = match opts.initial_velocity {
        InitialVelocity::Maxwell => {
            let s = (params.kt / params.mass).sqrt();
            Vec2::new(
                s * rng.sample::<f64, _>(StandardNormal),
                s * rng.sample::<f64, _>(StandardNormal),
            )
        }
        InitialVelocity::Homogeneous => HomogeneousSolution::new(params)?.velocity(params.t_start()),
    };
    let n = params.n_steps();
    let mut states = Vec::with_capacity(n + 1);
    let mut noise = opts.record_noise.then(|| Vec::with_capacity(n));
    let mut state = PhaseState {
        t: params.t_start(),
        r: params.start,
        v: v0,
    };
    states.push(state);
    let mut events = 0usize;
    for k in 0..n {
        let outcome = match stepper.advance(&state, rng, opts.max_redraws) {
            Ok(o) => o,
            Err(Error::SimulationAborted { events: e, .. }) => {
                return Err(Error::SimulationAborted {
                    step: k,
                    events: events + e,
                })
            }
            Err(e) => return Err(e),
        };
        events += outcome.redraws;
        if events > opts.puncture_limit {
            return Err(Error::SimulationAborted { step: k, events });
        }
        state = outcome.state;
        // Grid times are recomputed rather than accumulated.
        state.t = params.time(k + 1);
        states.push(state);
        if let Some(noise) = noise.as_mut() {
            noise.push(outcome.force);
        }
    }
    Ok(Trajectory {
        params: params.clone(),
        states,
        noise,
    })
}

/// Noiseless boundary-value solution of `M R̈ + η Ṙ = 0` with
/// `R(-T/2) = R_i`, `R(T/2) = R_f`:
/// `R₀(t) = R_i + (R_f - R_i) (1 - e^{-γs}) / (1 - e^{-γT})`, `s = t + T/2`.
/// The path runs along the chord from `R_i` to `R_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousSolution {
    start: Vec2,
    delta: Vec2,
    gamma: f64,
    t0: f64,
    denom: f64,
}

impl HomogeneousSolution {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let gamma = params.omega_r();
        let span = gamma * params.duration;
        if span < 1e-12 {
            return Err(Error::IllConditioned { value: span });
        }
        let closest = segment_distance_to_origin(&params.start, &params.end);
        if closest <= params.puncture_radius {
            return Err(Error::Puncture {
                radius: closest,
                epsilon: params.puncture_radius,
            });
        }
        Ok(HomogeneousSolution {
            start: params.start,
            delta: params.end - params.start,
            gamma,
            t0: params.t_start(),
            denom: (-span).exp_m1(),
        })
    }

    pub fn position(&self, t: f64) -> Vec2 {
        let s = t - self.t0;
        self.start + self.delta * ((-self.gamma * s).exp_m1() / self.denom)
    }

    pub fn velocity(&self, t: f64) -> Vec2 {
        let s = t - self.t0;
        self.delta * (-self.gamma * (-self.gamma * s).exp() / self.denom)
    }
}

/// `R₀(t)` sampled on the simulation grid.
pub fn homogeneous_solution(params: &ModelParams) -> Result<Trajectory> {
    params.validate()?;
    let sol = HomogeneousSolution::new(params)?;
    let n = params.n_steps();
    let states = (0..=n)
        .map(|k| {
            let t = params.time(k);
            PhaseState {
                t,
                r: sol.position(t),
                v: sol.velocity(t),
            }
        })
        .collect();
    Ok(Trajectory {
        params: params.clone(),
        states,
        noise: None,
    })
}

/// Distance from the origin to the segment `[a, b]`.
pub fn segment_distance_to_origin(a: &Vec2, b: &Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return a.norm();
    }
    let s = (-a.dot(&d) / len2).clamp(0.0, 1.0);
    (a + d * s).norm()
}
