//! Geometric phase of the lower level along a path and the level shift it
//! produces.
//!
//! For the planar model `A = -ħ∇φ/2`, so the phase is half the swept polar
//! angle with a minus sign. The angle is unwrapped step by step with
//! `atan2(R_k × R_{k+1}, R_k · R_{k+1})`, which is exact; the line integral
//! of `A` is kept as an independent check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry;
use crate::langevin::Trajectory;
use crate::params::{ModelParams, Vec2};

/// Per-step increments at or beyond this are treated as aliasing.
const MAX_INCREMENT: f64 = std::f64::consts::FRAC_PI_2;

/// Default closure tolerance, relative to `|R̄|`.
pub const CLOSURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseResult {
    /// `γ = -Δφ / 2`.
    pub gamma: f64,
    /// Unwrapped swept angle.
    pub delta_phi: f64,
    /// Winding number; only for paths that close.
    pub winding: Option<i64>,
    /// `δE = ħ γ / T`.
    pub shift: f64,
}

/// Phase along a trajectory, using the default closure tolerance.
pub fn accumulate_phase(traj: &Trajectory) -> Result<PhaseResult> {
    let tol = CLOSURE_TOLERANCE * traj.params.r_bar().max(f64::MIN_POSITIVE);
    phase_of_path(&traj.states.iter().map(|s| s.r).collect::<Vec<_>>(), &traj.params, tol)
}

/// Phase along an arbitrary polyline. `closure_tol` is absolute.
pub fn phase_of_path(points: &[Vec2], params: &ModelParams, closure_tol: f64) -> Result<PhaseResult> {
    let delta_phi = unwrapped_angle(points, params)?;
    let gamma = -0.5 * delta_phi;
    let winding = match (points.first(), points.last()) {
        (Some(a), Some(b)) if (b - a).norm() < closure_tol => Some((delta_phi / std::f64::consts::TAU).round() as i64),
        _ => None,
    };
    Ok(PhaseResult {
        gamma,
        delta_phi,
        winding,
        shift: level_shift(gamma, params),
    })
}

/// Sum of the per-step polar angle increments.
pub fn unwrapped_angle(points: &[Vec2], params: &ModelParams) -> Result<f64> {
    if let Some(p) = points.first() {
        geometry::checked_radius(p, params)?;
    }
    let mut total = 0.0;
    for (k, w) in points.windows(2).enumerate() {
        geometry::checked_radius(&w[1], params)?;
        let (a, b) = (&w[0], &w[1]);
        let inc = (a.x * b.y - a.y * b.x).atan2(a.dot(b));
        if inc.abs() >= MAX_INCREMENT {
            return Err(Error::Aliasing {
                step: k,
                increment: inc,
            });
        }
        total += inc;
    }
    Ok(total)
}

/// `δE = ħ γ / T`.
pub fn level_shift(gamma: f64, params: &ModelParams) -> f64 {
    params.hbar * gamma / params.duration
}

/// `Σ A(R_mid)·ΔR / ħ` with the midpoint rule; converges to `γ` at second
/// order in the step.
pub fn line_integral_phase(points: &[Vec2], params: &ModelParams) -> Result<f64> {
    let mut total = 0.0;
    for w in points.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        total += geometry::berry_connection(&mid, params)?.dot(&(w[1] - w[0]));
    }
    Ok(total / params.hbar)
}

/// `n` counter-clockwise turns (clockwise for negative `n`) on a circle of
/// `radius`, starting at angle `phase0`, sampled at `steps` equal increments.
/// The last point is set equal to the first, so the loop closes exactly.
pub fn circle(radius: f64, turns: i64, phase0: f64, steps: usize) -> Vec<Vec2> {
    let sweep = std::f64::consts::TAU * turns as f64;
    let mut pts: Vec<Vec2> = (0..=steps)
        .map(|k| {
            let a = phase0 + sweep * k as f64 / steps as f64;
            Vec2::new(radius * a.cos(), radius * a.sin())
        })
        .collect();
    pts[steps] = pts[0];
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params() -> ModelParams {
        ModelParams {
            duration: 2.0,
            hbar: 1.0,
            puncture_radius: 1e-3,
            ..ModelParams::desk_scale()
        }
    }

    #[test]
    fn circle_one_turn() {
        let p = params();
        let r = phase_of_path(&circle(2.0, 1, 0.0, 400), &p, 1e-12).unwrap();
        assert!((r.delta_phi - 2.0 * PI).abs() < 1e-12);
        assert!((r.gamma + PI).abs() < 1e-12);
        assert_eq!(r.winding, Some(1));
        assert!((r.shift + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn radial_path_has_no_phase() {
        let p = params();
        let pts: Vec<Vec2> = (1..50).map(|k| Vec2::new(0.3, 0.4) * k as f64).collect();
        let r = phase_of_path(&pts, &p, 1e-12).unwrap();
        assert!(r.gamma.abs() < 1e-15);
        assert!(r.shift.abs() < 1e-15);
        assert_eq!(r.winding, None);
    }

    #[test]
    fn shift_arithmetic() {
        let mut p = params();
        assert_eq!(level_shift(0.0, &p), 0.0);
        p.duration = 1.0;
        assert!((level_shift(-PI, &p) + PI).abs() < 1e-15);
        let half = level_shift(
            -PI,
            &ModelParams {
                duration: 2.0,
                ..p.clone()
            },
        );
        assert!((half - 0.5 * level_shift(-PI, &p)).abs() < 1e-15);
    }

    #[test]
    fn coarse_steps_alias() {
        let p = params();
        let pts = circle(1.0, 1, 0.0, 4);
        assert!(matches!(
            phase_of_path(&pts, &p, 1e-12),
            Err(Error::Aliasing { step: 0, .. })
        ));
    }

    #[test]
    fn puncture_is_rejected() {
        let p = params();
        let pts = [Vec2::new(1.0, 0.0), Vec2::new(1e-4, 0.0)];
        assert!(matches!(unwrapped_angle(&pts, &p), Err(Error::Puncture { .. })));
    }

    #[test]
    fn quantized_windings() {
        let p = params();
        for n in -3..=3 {
            for &(radius, phase0) in &[(0.5, 0.3), (7.0, -2.0)] {
                let r = phase_of_path(&circle(radius, n, phase0, 1000), &p, 1e-12).unwrap();
                assert!((r.gamma + PI * n as f64).abs() < 1e-9);
                assert_eq!(r.winding, Some(n));
            }
        }
    }

    #[test]
    fn line_integral_converges_at_second_order() {
        let p = params();
        // Off-centre ellipse: the line integral is not exact per step.
        let path = |steps: usize| -> Vec<Vec2> {
            (0..=steps)
                .map(|k| {
                    let s = std::f64::consts::TAU * k as f64 / steps as f64;
                    Vec2::new(0.8 + 2.0 * s.cos(), 0.3 + 1.1 * s.sin())
                })
                .collect()
        };
        let err = |steps| {
            let pts = path(steps);
            let exact = phase_of_path(&pts, &p, 1e-9).unwrap().gamma;
            (line_integral_phase(&pts, &p).unwrap() - exact).abs()
        };
        let order = (err(200) / err(400)).log2();
        assert!(order >= 1.9, "order {order}");
    }

    proptest::proptest! {
        #[test]
        fn reversal_negates(x0 in 2.0f64..3.0, y0 in -1.0f64..1.0, dx in -0.02f64..0.02, dy in -0.02f64..0.02) {
            let p = params();
            let pts: Vec<Vec2> = (0..60)
                .map(|k| Vec2::new(x0 + dx * k as f64, y0 + dy * k as f64 + 0.2 * (k as f64 * 0.3).sin()))
                .collect();
            let fwd = phase_of_path(&pts, &p, 0.0).unwrap().gamma;
            let rev: Vec<Vec2> = pts.iter().rev().copied().collect();
            let back = phase_of_path(&rev, &p, 0.0).unwrap().gamma;
            proptest::prop_assert!((fwd + back).abs() < 1e-12);
        }

        #[test]
        fn scale_invariant(lambda in 0.1f64..50.0, turns in 0.1f64..2.5) {
            let p = params();
            let pts: Vec<Vec2> = (0..=500)
                .map(|k| {
                    let a = turns * std::f64::consts::TAU * k as f64 / 500.0;
                    Vec2::new((1.0 + 0.3 * a.sin()) * a.cos(), (1.0 + 0.3 * a.sin()) * a.sin())
                })
                .collect();
            let scaled: Vec<Vec2> = pts.iter().map(|q| q * lambda).collect();
            let a = phase_of_path(&pts, &p, 0.0).unwrap().gamma;
            let b = phase_of_path(&scaled, &p, 0.0).unwrap().gamma;
            proptest::prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
