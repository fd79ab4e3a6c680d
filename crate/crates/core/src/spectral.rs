//! Spectral densities of the slow coordinate, the force transfer function,
//! and the bandwidth (adiabaticity) criterion.
//!
//! Convention: `J(ω) = ∫ K(t) e^{iωt} dt` over the whole line, so white
//! force noise has `J_F = 2ηkT` and `J_R = J_F / (M² ω² (ω² + ω_r²))`.
//! The mean square is then `(1/π) ∫₀^∞ J dω`; [`Spectrum::mean_square`]
//! applies that factor. All densities are per Cartesian component.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::langevin::Trajectory;
use crate::params::ModelParams;

/// Default number of Welch segments.
pub const DEFAULT_SEGMENTS: usize = 16;
/// Default adiabaticity threshold.
pub const ADIABATIC_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Position,
    Velocity,
    Force,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Position,
    Velocity,
    Force,
    Energy,
}

impl From<Signal> for SpectrumKind {
    fn from(s: Signal) -> Self {
        match s {
            Signal::Position => SpectrumKind::Position,
            Signal::Velocity => SpectrumKind::Velocity,
            Signal::Force => SpectrumKind::Force,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Ascending, strictly positive.
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
    pub kind: SpectrumKind,
}

impl Spectrum {
    /// Grid spacing.
    pub fn d_omega(&self) -> f64 {
        self.omega[0]
    }

    /// `(1/π) ∫ J dω` with the Nyquist bin at half weight — Parseval for the
    /// estimator, exactly, when no window is applied.
    pub fn mean_square(&self) -> f64 {
        let n = self.density.len();
        let sum: f64 = self.density[..n - 1].iter().sum::<f64>() + 0.5 * self.density[n - 1];
        sum * self.d_omega() / PI
    }

    /// Mean over bins in `[lo, hi]` of `density / reference(ω)`.
    pub fn band_ratio<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, reference: F) -> Result<f64> {
        let ratios: Vec<f64> = self
            .omega
            .iter()
            .zip(&self.density)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(w, d)| d / reference(*w))
            .collect();
        if ratios.is_empty() {
            return Err(Error::Domain(format!("no frequency bins in [{lo}, {hi}]")));
        }
        Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
    }

    /// Least-squares slope of `ln J` against `ln ω` over `[lo, hi]`.
    pub fn log_slope(&self, lo: f64, hi: f64) -> Result<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .omega
            .iter()
            .zip(&self.density)
            .filter(|(w, d)| **w >= lo && **w <= hi && **d > 0.0)
            .map(|(w, d)| (w.ln(), d.ln()))
            .unzip();
        Ok(crate::stats::linear_fit(&x, &y)?.slope)
    }

    /// Pointwise mean of spectra on the same grid.
    pub fn average(spectra: &[Spectrum]) -> Result<Spectrum> {
        let first = spectra
            .first()
            .ok_or_else(|| Error::Domain("no spectra to average".into()))?;
        let mut density = vec![0.0; first.density.len()];
        for s in spectra {
            if s.omega.len() != density.len() {
                return Err(Error::Domain("spectra on different grids".into()));
            }
            for (acc, d) in density.iter_mut().zip(&s.density) {
                *acc += d;
            }
        }
        let n = spectra.len() as f64;
        density.iter_mut().for_each(|d| *d /= n);
        Ok(Spectrum {
            omega: first.omega.clone(),
            density,
            kind: first.kind,
        })
    }

    /// Writes `omega,density` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "omega,density")?;
        for (w, d) in self.omega.iter().zip(&self.density) {
            writeln!(out, "{w:.16e},{d:.16e}")?;
        }
        Ok(())
    }
}

/// Welch estimator with a periodic Hann window and 50% overlap. Reusable
/// across many series of the same length.
pub struct Welch {
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    window_power: f64,
    segments: usize,
    seg_len: usize,
    dt: f64,
}

impl std::fmt::Debug for Welch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Welch")
            .field("segments", &self.segments)
            .field("seg_len", &self.seg_len)
            .field("dt", &self.dt)
            .finish()
    }
}

impl Welch {
    /// Estimator for series of `len` samples spaced by `dt`, split into
    /// `segments` half-overlapping windows.
    pub fn new(len: usize, dt: f64, segments: usize) -> Result<Self> {
        if segments == 0 || len < 2 * segments || len < 4 {
            return Err(Error::Domain(format!(
                "{len} samples are too few for {segments} spectral segments"
            )));
        }
        let seg_len = 2 * len / (segments + 1);
        let seg_len = seg_len.min(len);
        if seg_len < 4 {
            return Err(Error::Domain(format!("segments of {seg_len} samples are too short")));
        }
        let window: Vec<f64> = (0..seg_len)
            .map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / seg_len as f64).cos())
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(seg_len);
        Ok(Welch {
            fft,
            window,
            window_power,
            segments,
            seg_len,
            dt,
        })
    }

    /// Frequencies `2πk / (L dt)`, `k = 1..=L/2`.
    pub fn omega(&self) -> Vec<f64> {
        let dw = 2.0 * PI / (self.seg_len as f64 * self.dt);
        (1..=self.seg_len / 2).map(|k| k as f64 * dw).collect()
    }

    pub fn segment_len(&self) -> usize {
        self.seg_len
    }

    /// Density estimate of one real series, DC excluded.
    pub fn estimate(&self, x: &[f64]) -> Vec<f64> {
        let hop = self.seg_len / 2;
        let half = self.seg_len / 2;
        let mut acc = vec![0.0; half];
        let mut buf = vec![Complex::new(0.0, 0.0); self.seg_len];
        for s in 0..self.segments {
            let seg = &x[s * hop..s * hop + self.seg_len];
            let mean = seg.iter().sum::<f64>() / self.seg_len as f64;
            for ((b, v), w) in buf.iter_mut().zip(seg).zip(&self.window) {
                *b = Complex::new((v - mean) * w, 0.0);
            }
            self.fft.process(&mut buf);
            for (a, c) in acc.iter_mut().zip(&buf[1..=half]) {
                *a += c.norm_sqr();
            }
        }
        let scale = self.dt / (self.window_power * self.segments as f64);
        acc.iter_mut().for_each(|a| *a *= scale);
        acc
    }
}

/// Welch periodogram of one signal of a trajectory, averaged over the two
/// Cartesian components.
pub fn periodogram(traj: &Trajectory, signal: Signal, averaging: usize) -> Result<Spectrum> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = match signal {
        Signal::Position => traj.states.iter().map(|s| (s.r.x, s.r.y)).unzip(),
        Signal::Velocity => traj.states.iter().map(|s| (s.v.x, s.v.y)).unzip(),
        Signal::Force => traj
            .noise
            .as_ref()
            .ok_or_else(|| Error::Domain("trajectory carries no force record".into()))?
            .iter()
            .map(|f| (f.x, f.y))
            .unzip(),
    };
    let welch = Welch::new(xs.len(), traj.dt(), averaging)?;
    let jx = welch.estimate(&xs);
    let jy = welch.estimate(&ys);
    Ok(Spectrum {
        omega: welch.omega(),
        density: jx.iter().zip(&jy).map(|(a, b)| 0.5 * (a + b)).collect(),
        kind: signal.into(),
    })
}

/// `J_R(ω) = 2ηkT / (M² ω² (ω² + ω_r²))`.
pub fn transfer_jr(omega: f64, params: &ModelParams) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::DivergentIntegral(format!(
            "position spectrum diverges at omega = {omega}"
        )));
    }
    let wr = params.omega_r();
    Ok(force_density(params) / (params.mass.powi(2) * omega * omega * (omega * omega + wr * wr)))
}

/// `J_v(ω) = ω² J_R(ω)`.
pub fn velocity_density(omega: f64, params: &ModelParams) -> f64 {
    let wr = params.omega_r();
    force_density(params) / (params.mass.powi(2) * (omega * omega + wr * wr))
}

/// `J_F = 2ηkT`.
pub fn force_density(params: &ModelParams) -> f64 {
    2.0 * params.friction * params.kt
}

/// `ρ_E(ω) = ηkT / (M (ω² + ω_r²)) Θ(Λ - ω)`.
pub fn energy_spectral_density(omega: f64, params: &ModelParams, cutoff: f64) -> f64 {
    if omega > cutoff {
        return 0.0;
    }
    let wr = params.omega_r();
    params.friction * params.kt / (params.mass * (omega * omega + wr * wr))
}

/// Mean kinetic energy per component, `(1/π) ∫₀^Λ ρ_E dω`.
pub fn mean_energy(params: &ModelParams, cutoff: f64) -> f64 {
    let wr = params.omega_r();
    params.friction * params.kt / (PI * params.mass * wr) * (cutoff / wr).atan()
}

/// Autocovariance implied by a one-sided density, `(1/π) ∫ cos(ωt) J dω`.
pub fn autocovariance_from_spectrum(spec: &Spectrum, lag: f64) -> f64 {
    let n = spec.density.len();
    let sum: f64 = spec
        .omega
        .iter()
        .zip(&spec.density)
        .enumerate()
        .map(|(k, (w, d))| if k + 1 == n { 0.5 } else { 1.0 } * (w * lag).cos() * d)
        .sum();
    sum * spec.d_omega() / PI
}

/// `τ_c`, `ħ / (√6 kT)` unless overridden.
pub fn correlation_time(params: &ModelParams) -> Result<f64> {
    let tau = params.correlation_time();
    if tau.is_finite() {
        Ok(tau)
    } else {
        Err(Error::Domain("correlation time is infinite at kT = 0".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Adiabaticity {
    /// `ħ (1/τ_c) / ΔE(R̄)`.
    pub ratio: f64,
    pub ok: bool,
    /// `ħ / τ_c`.
    pub bandwidth_energy: f64,
    /// `2 g |R̄|`.
    pub level_spacing: f64,
    /// Same ratio evaluated at the smallest radius the trajectory visits.
    pub worst_case_ratio: Option<f64>,
}

/// Noise bandwidth against level spacing; `ok` iff ratio < threshold.
pub fn adiabaticity_check(params: &ModelParams, threshold: f64, traj: Option<&Trajectory>) -> Adiabaticity {
    let bandwidth_energy = match params.tau_c {
        Some(tau) => params.hbar / tau,
        None => 6f64.sqrt() * params.kt,
    };
    let level_spacing = 2.0 * params.coupling * params.r_bar();
    let ratio = bandwidth_energy / level_spacing;
    Adiabaticity {
        ratio,
        ok: ratio < threshold,
        bandwidth_energy,
        level_spacing,
        worst_case_ratio: traj.map(|t| bandwidth_energy / (2.0 * params.coupling * t.min_radius())),
    }
}
