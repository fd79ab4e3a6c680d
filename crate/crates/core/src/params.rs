//! Physical and numerical constants of the model.
//!
//! Units are whatever the caller chooses; the defaults are natural units with
//! `hbar = 1` and the temperature stored directly as an energy `kT`.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Relative slack allowed when checking that `duration` is a whole number of
/// steps.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Slow-coordinate mass `M`.
    pub mass: f64,
    /// Friction coefficient `eta`.
    pub friction: f64,
    /// Slow/fast coupling `g`; fast levels are `±g|R|`.
    pub coupling: f64,
    /// Bath temperature as an energy, `kT`.
    pub kt: f64,
    pub hbar: f64,
    /// Total duration; paths live on `[-T/2, T/2]`.
    pub duration: f64,
    pub start: Vec2,
    pub end: Vec2,
    pub dt: f64,
    pub puncture_radius: f64,
    /// Optional user cap on the upper noise cutoff `omega_b`.
    pub omega_b_cap: Option<f64>,
    /// Overrides the bath correlation time `hbar / (sqrt(6) kT)`.
    pub tau_c: Option<f64>,
}

impl ModelParams {
    /// Desk-scale defaults: strongly damped, low-noise, adiabatic, and with a
    /// non-empty analytic noise band.
    pub fn desk_scale() -> Self {
        let start = Vec2::new(1.0, 0.0);
        let end = Vec2::new(0.0, 1.0);
        ModelParams {
            mass: 400.0,
            friction: 400.0,
            coupling: 10.0,
            kt: 0.1,
            hbar: 1.0,
            duration: 20.0,
            start,
            end,
            dt: 0.02,
            puncture_radius: default_puncture_radius(&start, &end),
            omega_b_cap: None,
            tau_c: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("friction", self.friction)?;
        positive("coupling", self.coupling)?;
        positive("hbar", self.hbar)?;
        positive("duration", self.duration)?;
        positive("dt", self.dt)?;
        positive("puncture_radius", self.puncture_radius)?;
        if !(self.kt >= 0.0 && self.kt.is_finite()) {
            return Err(Error::param("kT", format!("must be >= 0, got {}", self.kt)));
        }
        for (key, p) in [("start", &self.start), ("end", &self.end)] {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::param(key, "must be finite"));
            }
            if p.norm() <= self.puncture_radius {
                return Err(Error::param(
                    key,
                    format!(
                        "|R| = {} must exceed the puncture radius {}",
                        p.norm(),
                        self.puncture_radius
                    ),
                ));
            }
        }
        if let Some(cap) = self.omega_b_cap {
            positive("omega_b_cap", cap)?;
        }
        if let Some(tau) = self.tau_c {
            positive("tau_c", tau)?;
        }
        let steps = self.duration / self.dt;
        if steps < 1.0 || (steps - steps.round()).abs() > GRID_SLACK * steps {
            return Err(Error::param(
                "dt",
                format!(
                    "duration {} is not a whole number of steps of {}",
                    self.duration, self.dt
                ),
            ));
        }
        Ok(())
    }

    /// Number of integration steps; the grid has `n_steps() + 1` points.
    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn t_start(&self) -> f64 {
        -0.5 * self.duration
    }

    /// Grid time `t_k = -T/2 + k dt`.
    pub fn time(&self, k: usize) -> f64 {
        self.t_start() + k as f64 * self.dt
    }

    /// Relaxation time `tau = M / eta`.
    pub fn tau(&self) -> f64 {
        self.mass / self.friction
    }

    /// Velocity relaxation rate `omega_r = eta / M`.
    pub fn omega_r(&self) -> f64 {
        self.friction / self.mass
    }

    pub fn midpoint(&self) -> Vec2 {
        0.5 * (self.start + self.end)
    }

    /// `|R̄|` with `R̄ = (R_i + R_f) / 2`.
    pub fn r_bar(&self) -> f64 {
        self.midpoint().norm()
    }

    /// Low-frequency cutoff imposed by the pinned boundary conditions.
    pub fn omega_c(&self) -> f64 {
        std::f64::consts::PI / self.duration
    }

    /// Bath correlation time, `hbar / (sqrt(6) kT)` unless overridden.
    /// Infinite at `kT = 0`.
    pub fn correlation_time(&self) -> f64 {
        match self.tau_c {
            Some(tau) => tau,
            None => self.hbar / (6f64.sqrt() * self.kt),
        }
    }

    /// Upper noise cutoff `min(1/tau_c, cap)`.
    pub fn omega_b(&self) -> f64 {
        let band = 1.0 / self.correlation_time();
        match self.omega_b_cap {
            Some(cap) => band.min(cap),
            None => band,
        }
    }

    /// Checks `omega_c < omega_b`, the precondition of the analytic
    /// broadening formulas.
    pub fn check_noise_band(&self) -> Result<()> {
        let (lo, hi) = (self.omega_c(), self.omega_b());
        if lo < hi {
            Ok(())
        } else {
            Err(Error::param(
                "omega_b",
                format!("noise band is empty: omega_c = {lo} >= omega_b = {hi}"),
            ))
        }
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::desk_scale()
    }
}

/// `1e-3 |R̄|`, the puncture guard used when none is configured.
pub fn default_puncture_radius(start: &Vec2, end: &Vec2) -> f64 {
    1e-3 * (0.5 * (start + end)).norm()
}

fn positive(key: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(key, format!("must be > 0, got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scale_is_legal() {
        let p = ModelParams::desk_scale();
        p.validate().unwrap();
        assert_eq!(p.n_steps(), 1000);
        p.check_noise_band().unwrap();
        assert!((p.time(p.n_steps()) - 0.5 * p.duration).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_values_by_key() {
        let mut p = ModelParams::desk_scale();
        p.kt = -1.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParam { key: "kT", .. })));

        let mut p = ModelParams::desk_scale();
        p.start = Vec2::new(1e-4, 0.0);
        assert!(matches!(p.validate(), Err(Error::InvalidParam { key: "start", .. })));

        let mut p = ModelParams::desk_scale();
        p.dt = 0.03;
        assert!(matches!(p.validate(), Err(Error::InvalidParam { key: "dt", .. })));
    }

    #[test]
    fn zero_temperature_has_empty_band() {
        let mut p = ModelParams::desk_scale();
        p.kt = 0.0;
        p.validate().unwrap();
        assert!(p.correlation_time().is_infinite());
        assert!(p.check_noise_band().is_err());
        p.tau_c = Some(1.0);
        p.check_noise_band().unwrap();
    }
}
