//! Monte Carlo ensembles of level shifts.
//!
//! Each path draws from its own substream `(master_seed, path_index)`, so an
//! ensemble is a pure function of its inputs whatever the thread count.
//! Forward paths end wherever the noise takes them; endpoint conditioning
//! keeps only those that land within a bin around `R_f`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::langevin::{simulate, SimOptions};
use crate::parallel::map_indexed;
use crate::params::{ModelParams, Vec2};
use crate::phase::accumulate_phase;
use crate::predictions::low_noise_check;
use crate::rng::StreamFactory;
use crate::stats::{linear_fit, mean_var, Histogram, LinearFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conditioning {
    Free,
    /// Keep paths with `|R(T/2) - R_f| < radius`.
    Endpoint {
        radius: f64,
    },
}

impl Conditioning {
    /// Bin radius `0.5 sqrt(4 kT T / η)`: half the planar diffusion length.
    pub fn default_radius(params: &ModelParams) -> f64 {
        0.5 * (4.0 * params.kt * params.duration / params.friction).sqrt()
    }

    fn accepts(&self, endpoint: &Vec2, params: &ModelParams) -> bool {
        match *self {
            Conditioning::Free => true,
            Conditioning::Endpoint { radius } => (endpoint - params.end).norm() < radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub path_index: u64,
    /// `NaN` for aborted paths.
    pub delta_e: f64,
    pub gamma: f64,
    pub endpoint: Vec2,
    pub accepted: bool,
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftEnsemble {
    pub samples: Vec<Sample>,
    pub conditioning: Conditioning,
    pub n_paths: usize,
    pub n_accepted: usize,
    pub n_aborted: usize,
    pub mean: f64,
    /// Unbiased sample variance of accepted `δE`.
    pub variance: f64,
    pub std_err_mean: f64,
    pub accepted_fraction: f64,
    pub histogram: Histogram,
}

impl ShiftEnsemble {
    fn from_samples(mut samples: Vec<Sample>, conditioning: Conditioning, params: &ModelParams) -> Result<Self> {
        for s in samples.iter_mut() {
            s.accepted = !s.aborted && conditioning.accepts(&s.endpoint, params);
        }
        let kept: Vec<f64> = samples.iter().filter(|s| s.accepted).map(|s| s.delta_e).collect();
        let n_aborted = samples.iter().filter(|s| s.aborted).count();
        if kept.is_empty() {
            return Err(Error::EmptyEnsemble {
                radius: match conditioning {
                    Conditioning::Free => f64::INFINITY,
                    Conditioning::Endpoint { radius } => radius,
                },
                endpoints: endpoint_summary(&samples, params),
            });
        }
        let (mean, variance) = mean_var(&kept);
        let n_paths = samples.len();
        Ok(ShiftEnsemble {
            n_paths,
            n_accepted: kept.len(),
            n_aborted,
            mean,
            variance,
            std_err_mean: (variance / kept.len() as f64).sqrt(),
            accepted_fraction: kept.len() as f64 / n_paths as f64,
            histogram: Histogram::freedman_diaconis(&kept),
            conditioning,
            samples,
        })
    }

    /// Same paths, different acceptance rule.
    pub fn recondition(&self, conditioning: Conditioning, params: &ModelParams) -> Result<Self> {
        Self::from_samples(self.samples.clone(), conditioning, params)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn abort_fraction(&self) -> f64 {
        self.n_aborted as f64 / self.n_paths as f64
    }

    /// Writes `path_index,deltaE,endpoint_x,endpoint_y,accepted`.
    pub fn write_samples_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "path_index,deltaE,endpoint_x,endpoint_y,accepted")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{}",
                s.path_index, s.delta_e, s.endpoint.x, s.endpoint.y, s.accepted
            )?;
        }
        Ok(())
    }
}

fn endpoint_summary(samples: &[Sample], params: &ModelParams) -> String {
    let d: Vec<f64> = samples
        .iter()
        .filter(|s| !s.aborted)
        .map(|s| (s.endpoint - params.end).norm())
        .collect();
    if d.is_empty() {
        return format!("all {} paths aborted", samples.len());
    }
    let (mean, var) = mean_var(&d);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    format!(
        "distance of endpoints from R_f over {} paths: min {min:.4e}, mean {mean:.4e}, sd {:.4e}",
        d.len(),
        var.sqrt()
    )
}

/// Runs `n_paths` independent paths and collects their level shifts.
pub fn run_ensemble(
    params: &ModelParams,
    n_paths: usize,
    opts: &SimOptions,
    conditioning: Conditioning,
    master_seed: u64,
) -> Result<ShiftEnsemble> {
    params.validate()?;
    if n_paths < 2 {
        return Err(Error::param("n_paths", format!("must be at least 2, got {n_paths}")));
    }
    if let Conditioning::Endpoint { radius } = conditioning {
        if !(radius > 0.0) {
            return Err(Error::param("bin_radius", format!("must be > 0, got {radius}")));
        }
    }
    let factory = StreamFactory::new(master_seed);
    let results: Vec<Result<Sample>> = map_indexed(n_paths as u64, |i| {
        match simulate(params, opts, &mut factory.substream(i)) {
            Ok(traj) => {
                let phase = accumulate_phase(&traj)?;
                Ok(Sample {
                    path_index: i,
                    delta_e: phase.shift,
                    gamma: phase.gamma,
                    endpoint: traj.last().r,
                    accepted: false,
                    aborted: false,
                })
            }
            Err(Error::SimulationAborted { .. }) => Ok(Sample {
                path_index: i,
                delta_e: f64::NAN,
                gamma: f64::NAN,
                endpoint: Vec2::new(f64::NAN, f64::NAN),
                accepted: false,
                aborted: true,
            }),
            Err(e) => Err(e),
        }
    });
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;
    ShiftEnsemble::from_samples(samples, conditioning, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Kt,
    Hbar,
    Duration,
    Friction,
}

impl SweepParam {
    fn apply(&self, params: &ModelParams, value: f64) -> ModelParams {
        let mut p = params.clone();
        match self {
            SweepParam::Kt => p.kt = value,
            SweepParam::Hbar => p.hbar = value,
            SweepParam::Duration => p.duration = value,
            SweepParam::Friction => p.friction = value,
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub sigma_mc: f64,
    pub mean: f64,
    pub std_err_mean: f64,
    pub low_noise_margin: f64,
    /// Low-noise points only enter the fit.
    pub included: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingStudy {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    /// Fit of `ln σ_MC` against `ln value` over included rows.
    pub fit: Option<LinearFit>,
}

impl ScalingStudy {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Ensembles across a parameter grid, all with the same seed (common random
/// numbers), and the log-log exponent of the ensemble spread.
#[allow(clippy::too_many_arguments)]
pub fn scaling_study(
    params: &ModelParams,
    param: SweepParam,
    values: &[f64],
    n_paths: usize,
    opts: &SimOptions,
    conditioning: Conditioning,
    master_seed: u64,
    low_noise_threshold: f64,
) -> Result<ScalingStudy> {
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let p = param.apply(params, value);
        let (margin, ok) = low_noise_check(&p, low_noise_threshold);
        let ens = run_ensemble(&p, n_paths, opts, conditioning, master_seed)?;
        rows.push(SweepRow {
            value,
            sigma_mc: ens.std_dev(),
            mean: ens.mean,
            std_err_mean: ens.std_err_mean,
            low_noise_margin: margin,
            included: ok && ens.std_dev() > 0.0,
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.included)
        .map(|r| (r.value.ln(), r.sigma_mc.ln()))
        .unzip();
    let fit = if x.len() >= 2 { Some(linear_fit(&x, &y)?) } else { None };
    Ok(ScalingStudy { param, rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::InitialVelocity;

    fn small() -> ModelParams {
        ModelParams {
            duration: 4.0,
            dt: 0.02,
            ..ModelParams::desk_scale()
        }
    }

    #[test]
    fn zero_temperature_is_deterministic() {
        let p = ModelParams { kt: 0.0, ..small() };
        let opts = SimOptions {
            initial_velocity: InitialVelocity::Homogeneous,
            ..SimOptions::default()
        };
        let ens = run_ensemble(&p, 5, &opts, Conditioning::Free, 1).unwrap();
        let expect = crate::predictions::mean_shift(&p).unwrap();
        assert!(ens.samples.iter().all(|s| (s.delta_e - expect).abs() < 1e-12));
        assert_eq!(ens.variance, 0.0);
    }

    #[test]
    fn needs_two_paths() {
        let e = run_ensemble(&small(), 1, &SimOptions::default(), Conditioning::Free, 1);
        assert!(matches!(e, Err(Error::InvalidParam { key: "n_paths", .. })));
    }

    #[test]
    fn stored_statistics_match_samples() {
        let p = small();
        let ens = run_ensemble(&p, 200, &SimOptions::default(), Conditioning::Free, 3).unwrap();
        let xs: Vec<f64> = ens.samples.iter().filter(|s| s.accepted).map(|s| s.delta_e).collect();
        let (m, v) = mean_var(&xs);
        assert!((m - ens.mean).abs() <= 1e-12 * m.abs());
        assert!((v - ens.variance).abs() <= 1e-12 * v);
        assert!((ens.std_err_mean - (v / xs.len() as f64).sqrt()).abs() < 1e-18);
        assert!((0.0..=1.0).contains(&ens.accepted_fraction));
        assert_eq!(ens.histogram.total() as usize, ens.n_accepted);
    }

    #[test]
    fn empty_conditioning_reports_endpoints() {
        let p = small();
        let e = run_ensemble(
            &p,
            10,
            &SimOptions::default(),
            Conditioning::Endpoint { radius: 1e-9 },
            3,
        );
        match e {
            Err(Error::EmptyEnsemble { endpoints, .. }) => assert!(endpoints.contains("min")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wide_bin_equals_free() {
        let p = small();
        let free = run_ensemble(&p, 100, &SimOptions::default(), Conditioning::Free, 9).unwrap();
        let far = free
            .samples
            .iter()
            .map(|s| (s.endpoint - p.end).norm())
            .fold(0.0, f64::max);
        let wide = free
            .recondition(Conditioning::Endpoint { radius: far * 1.0001 }, &p)
            .unwrap();
        assert_eq!(wide.mean, free.mean);
        assert_eq!(wide.variance, free.variance);
    }

    #[test]
    fn samples_csv_header() {
        let ens = run_ensemble(&small(), 3, &SimOptions::default(), Conditioning::Free, 1).unwrap();
        let mut buf = Vec::new();
        ens.write_samples_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("path_index,deltaE,endpoint_x,endpoint_y,accepted\n0,"));
        assert_eq!(text.lines().count(), 4);
    }
}
