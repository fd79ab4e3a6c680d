//! Fast-system energies and the geometric gauge fields seen by the slow
//! coordinate of the planar spin-1/2 model `H_sf = -g R·σ`.
//!
//! The lower eigenstate depends on `R` only through the polar angle `φ`,
//! so every geometric quantity is purely angular:
//!
//! * connection `A = -ħ∇φ/2 = (ħ / 2R²) (R_y, -R_x)`
//! * scalar potential `Φ = ħ² / (2 M R²)`
//! * quantum metric `g_ij = (δ_ij - R̂_i R̂_j) / (4 R²)`
//!
//! The magnetic field `B = ∇×A` is a delta function at the origin. Off the
//! origin it is identically zero, which is why the simulator only enforces
//! the puncture and never evaluates a Lorentz force.

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelParams, Vec2};

/// Magnetic field off the origin.
pub const MAGNETIC_FIELD_OFF_ORIGIN: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeEval {
    pub connection: Vec2,
    pub scalar_potential: f64,
    pub electric_force: Vec2,
    pub metric: Matrix2<f64>,
}

/// Fast-system energies `(E+, E-) = (+g|R|, -g|R|)`.
pub fn fast_energies(r: &Vec2, params: &ModelParams) -> Result<(f64, f64)> {
    let radius = r.norm();
    if radius == 0.0 {
        return Err(Error::Puncture { radius, epsilon: 0.0 });
    }
    let e = params.coupling * radius;
    Ok((e, -e))
}

/// Level spacing `ΔE = E+ - E- = 2g|R|`.
pub fn level_spacing(r: &Vec2, params: &ModelParams) -> Result<f64> {
    let (plus, minus) = fast_energies(r, params)?;
    Ok(plus - minus)
}

/// Returns `|R|` or a puncture error when the point is inside the guard.
pub fn checked_radius(r: &Vec2, params: &ModelParams) -> Result<f64> {
    let radius = r.norm();
    if radius > params.puncture_radius {
        Ok(radius)
    } else {
        Err(Error::Puncture {
            radius,
            epsilon: params.puncture_radius,
        })
    }
}

pub fn berry_connection(r: &Vec2, params: &ModelParams) -> Result<Vec2> {
    let radius = checked_radius(r, params)?;
    let scale = params.hbar / (2.0 * radius * radius);
    Ok(Vec2::new(r.y, -r.x) * scale)
}

pub fn scalar_potential(r: &Vec2, params: &ModelParams) -> Result<f64> {
    let radius = checked_radius(r, params)?;
    Ok(params.hbar * params.hbar / (2.0 * params.mass * radius * radius))
}

/// Radial repulsive force `-∇Φ = ħ² R̂ / (M |R|³)`.
pub fn electric_force(r: &Vec2, params: &ModelParams) -> Result<Vec2> {
    let radius = checked_radius(r, params)?;
    let r4 = radius * radius * radius * radius;
    Ok(r * (params.hbar * params.hbar / (params.mass * r4)))
}

/// Real part of the quantum geometric tensor of the lower level.
pub fn metric_tensor(r: &Vec2, params: &ModelParams) -> Result<Matrix2<f64>> {
    let radius = checked_radius(r, params)?;
    let r2 = radius * radius;
    let unit = r / radius;
    let projector = Matrix2::identity() - unit * unit.transpose();
    Ok(projector / (4.0 * r2))
}

/// The metric-trace form of the scalar potential, `ħ² Σ g_ii / 2` as printed
/// alongside the Born-Oppenheimer Hamiltonian. It differs from
/// [`scalar_potential`] by the mass factor and is exposed for comparison only.
pub fn metric_trace_potential(r: &Vec2, params: &ModelParams) -> Result<f64> {
    let g = metric_tensor(r, params)?;
    Ok(0.5 * params.hbar * params.hbar * g.trace())
}

pub fn gauge_eval(r: &Vec2, params: &ModelParams) -> Result<GaugeEval> {
    Ok(GaugeEval {
        connection: berry_connection(r, params)?,
        scalar_potential: scalar_potential(r, params)?,
        electric_force: electric_force(r, params)?,
        metric: metric_tensor(r, params)?,
    })
}
