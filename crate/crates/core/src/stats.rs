//! Small statistics helpers. Everything here reduces in slice order so
//! results do not depend on how samples were produced.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Mean and unbiased variance (two-pass).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// Half-width of the 95% confidence interval on the slope.
    pub slope_ci95: f64,
}

/// Ordinary least squares `y = a + b x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::Domain(format!("linear fit needs >= 2 paired points, got {n}")));
    }
    let (mx, _) = mean_var(x);
    let (my, _) = mean_var(y);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("linear fit with a single abscissa".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_se, slope_ci95) = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - intercept - slope * a;
                r * r
            })
            .sum();
        let se = (rss / (n - 2) as f64 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 2) as f64)
            .map_err(|e| Error::Domain(e.to_string()))?
            .inverse_cdf(0.975);
        (se, t * se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
        slope_ci95,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// `bins` equal-width bins spanning the data.
    pub fn with_bins(xs: &[f64], bins: usize) -> Histogram {
        let bins = bins.max(1);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if xs.is_empty() {
            return Histogram {
                edges: vec![],
                counts: vec![],
            };
        }
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
        let mut counts = vec![0u64; bins];
        for &x in xs {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Histogram { edges, counts }
    }

    /// Freedman–Diaconis bin width `2 IQR n^{-1/3}`, capped at 1000 bins.
    pub fn freedman_diaconis(xs: &[f64]) -> Histogram {
        if xs.len() < 2 {
            return Histogram::with_bins(xs, 1);
        }
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let span = sorted[sorted.len() - 1] - sorted[0];
        let width = 2.0 * iqr / (xs.len() as f64).cbrt();
        let bins = if width > 0.0 && span > 0.0 {
            ((span / width).ceil() as usize).clamp(1, 1000)
        } else {
            1
        };
        Histogram::with_bins(xs, bins)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
