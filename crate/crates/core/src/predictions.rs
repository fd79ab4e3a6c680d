//! Closed-form low-noise results: mean level shift, broadening, the `κ`
//! bandwidth integral, the low-noise margin, and diffusion.
//!
//! With `x = ω M / η` the broadening integrand is `1 / (x² (1 + x²)²)`,
//! whose antiderivative is `-1/x - x / (2(1 + x²)) - (3/2) atan x`. The
//! integral runs from `x_c = (π/T) M/η` to `x_b = ω_b M/η`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::langevin::homogeneous_solution;
use crate::params::ModelParams;
use crate::phase::accumulate_phase;
use crate::quad;

/// Relative tolerance of the broadening quadrature.
const QUAD_TOL: f64 = 1e-10;
/// Default low-noise threshold on `kT T / (η R̄²)`.
pub const LOW_NOISE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    pub mean_shift: f64,
    pub sigma: f64,
    pub sigma_simplified: f64,
    pub kappa: f64,
    pub low_noise_margin: f64,
    pub low_noise_ok: bool,
    /// `δE[R₀]`; identical to `mean_shift`.
    pub c1: f64,
    /// `η kT ħ² / (T² R̄⁴)`.
    pub c2: f64,
    /// `M R̄² / (2 η² kT)`; infinite at `kT = 0`.
    pub c3: f64,
    pub x_c: f64,
    pub x_b: f64,
}

impl Predictions {
    pub fn compute(params: &ModelParams, low_noise_threshold: f64) -> Result<Self> {
        params.validate()?;
        let c1 = mean_shift(params)?;
        let (x_c, x_b) = cutoffs(params);
        let (margin, ok) = low_noise_check(params, low_noise_threshold);
        let r2 = params.r_bar().powi(2);
        Ok(Predictions {
            mean_shift: c1,
            sigma: sigma_analytic(params)?,
            sigma_simplified: sigma_simplified(params)?,
            kappa: if params.kt > 0.0 {
                kappa(x_c, x_b, params.tau() / params.duration)?
            } else {
                0.0
            },
            low_noise_margin: margin,
            low_noise_ok: ok,
            c1,
            c2: params.friction * params.kt * params.hbar.powi(2) / (params.duration.powi(2) * r2 * r2),
            c3: params.mass * r2 / (2.0 * params.friction.powi(2) * params.kt),
            x_c,
            x_b,
        })
    }
}

/// `(x_c, x_b) = (ω_c, ω_b) · M/η`.
pub fn cutoffs(params: &ModelParams) -> (f64, f64) {
    let tau = params.tau();
    (params.omega_c() * tau, params.omega_b() * tau)
}

/// `δE[R₀]`, the shift produced by the noiseless path.
pub fn mean_shift(params: &ModelParams) -> Result<f64> {
    Ok(accumulate_phase(&homogeneous_solution(params)?)?.shift)
}

/// `∫_{x_c}^{x_b} dx / (x² (1 + x²)²)` by adaptive quadrature.
pub fn band_integral(x_c: f64, x_b: f64) -> Result<f64> {
    if !(x_c > 0.0) {
        return Err(Error::DivergentIntegral(format!(
            "lower cutoff x_c = {x_c} must be positive; the integrand grows as 1/x^2"
        )));
    }
    if x_b < x_c {
        return Err(Error::Domain(format!("empty noise band: x_b = {x_b} < x_c = {x_c}")));
    }
    quad::integrate(|x| 1.0 / (x * x * (1.0 + x * x).powi(2)), x_c, x_b, QUAD_TOL)
}

/// `κ = sqrt((3τ/T) (1/π) ∫ dx / (x²(1 + x²)²))`.
pub fn kappa(x_c: f64, x_b: f64, tau_over_t: f64) -> Result<f64> {
    let integral = band_integral(x_c, x_b)?;
    Ok((3.0 * tau_over_t * integral / std::f64::consts::PI).sqrt())
}

fn integral_for(params: &ModelParams) -> Result<f64> {
    let (x_c, x_b) = cutoffs(params);
    band_integral(x_c, x_b)
}

/// Broadening estimate
/// `σ = (ħ/T) sqrt( (M kT / η² R̄²) [ |ΔR|²/R̄² + kT T/(η R̄²) ] (1/π) ∫ ... )`.
/// Zero at `kT = 0`.
pub fn sigma_analytic(params: &ModelParams) -> Result<f64> {
    if params.kt == 0.0 {
        return Ok(0.0);
    }
    let r2 = params.r_bar().powi(2);
    let (m, eta, kt, t) = (params.mass, params.friction, params.kt, params.duration);
    let bracket = (params.end - params.start).norm_squared() / r2 + kt * t / (eta * r2);
    let pref = m * kt / (eta * eta * r2);
    Ok(params.hbar / t * (pref * bracket * integral_for(params)? / std::f64::consts::PI).sqrt())
}

/// `σ ≈ kT (ħ / η R̄²) κ`, the form that follows when `|ΔR|² = 2kT T/η`.
pub fn sigma_simplified(params: &ModelParams) -> Result<f64> {
    if params.kt == 0.0 {
        return Ok(0.0);
    }
    let (x_c, x_b) = cutoffs(params);
    let k = kappa(x_c, x_b, params.tau() / params.duration)?;
    Ok(params.kt * params.hbar / (params.friction * params.r_bar().powi(2)) * k)
}

/// `(margin, ok)` with margin `kT T / (η R̄²)` and `ok` iff margin < threshold.
pub fn low_noise_check(params: &ModelParams, threshold: f64) -> (f64, bool) {
    let margin = params.kt * params.duration / (params.friction * params.r_bar().powi(2));
    (margin, margin < threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MsdPrediction {
    /// `2 d kT t / η` with `d = 2`.
    pub planar: f64,
    /// `2 kT t / η`, the one-dimensional form.
    pub one_dimensional: f64,
}

pub fn msd_prediction(t: f64, params: &ModelParams) -> MsdPrediction {
    let one = 2.0 * params.kt * t / params.friction;
    MsdPrediction {
        planar: 2.0 * one,
        one_dimensional: one,
    }
}

/// Frequency-domain ingredients of the broadening, kept for checking the
/// algebra that leads from the generating function to `σ`.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) mod table {
    use super::*;

    pub(crate) struct FTable<'a> {
        p: &'a ModelParams,
    }

    impl<'a> FTable<'a> {
        pub(crate) fn new(p: &'a ModelParams) -> Self {
            FTable { p }
        }

        fn rbar2(&self) -> f64 {
            self.p.r_bar().powi(2)
        }

        /// `|R₀(ω)|²` of the noiseless path's velocity profile,
        /// `|ΔR|² / (ω² (1 + (ωM/η)²))`.
        pub(crate) fn r0_sq(&self, w: f64) -> f64 {
            let x = w * self.p.tau();
            (self.p.end - self.p.start).norm_squared() / (w * w * (1.0 + x * x))
        }

        pub(crate) fn f1(&self, w: f64) -> f64 {
            let (m, eta) = (self.p.mass, self.p.friction);
            self.r0_sq(w) * (m * m * w.powi(4) + eta * eta * w * w)
        }

        /// Imaginary coefficient of `f2`; `R₀(ω)` is parallel to `ΔR` for
        /// every `ω`, so the cross product vanishes.
        pub(crate) fn f2(&self, _w: f64) -> f64 {
            0.0
        }

        pub(crate) fn f3(&self, w: f64) -> f64 {
            let (m, eta) = (self.p.mass, self.p.friction);
            (m * m * w.powi(4) + eta * eta * w * w).powi(2)
        }

        pub(crate) fn f4(&self, w: f64) -> f64 {
            (self.p.friction * self.p.kt * self.p.hbar * w / (self.p.duration * self.rbar2())).powi(2)
        }

        pub(crate) fn c2(&self) -> f64 {
            self.p.friction * self.p.kt * self.p.hbar.powi(2) / (self.p.duration.powi(2) * self.rbar2().powi(2))
        }

        /// The two terms of `σ²` as frequency integrals over `[ω_c, ω_b]`.
        pub(crate) fn variance_terms(&self) -> Result<(f64, f64)> {
            let (lo, hi) = (self.p.omega_c(), self.p.omega_b());
            let pi = std::f64::consts::PI;
            let first = self.c2() * quad::integrate(|w| w * w * self.f1(w) / self.f3(w), lo, hi, QUAD_TOL)? / pi;
            let second = self.p.duration * quad::integrate(|w| self.f4(w) / self.f3(w), lo, hi, QUAD_TOL)? / pi;
            Ok((first, second))
        }
    }
}
