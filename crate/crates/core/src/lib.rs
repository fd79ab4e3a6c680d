//! Langevin motion of a slow planar coordinate coupled to a spin-1/2 fast
//! system, the Berry-phase level shifts it induces, and the machinery to
//! check the closed-form broadening estimates against Monte Carlo.
//!
//! ```
//! use geo_langevin::{mean_shift, ModelParams};
//!
//! let p = ModelParams::desk_scale();
//! let shift = mean_shift(&p).unwrap();
//! assert!((shift + std::f64::consts::PI / 80.0).abs() < 1e-12);
//! ```

// Guards written `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod langevin;
pub mod parallel;
pub mod phase;
pub mod predictions;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod validate;

mod params;

pub use action::{interior_action, om_action, om_action_points, PathAction};
pub use ensemble::{run_ensemble, scaling_study, Conditioning, Sample, ScalingStudy, ShiftEnsemble, SweepParam};
pub use error::{Error, Result};
pub use geometry::{
    berry_connection, electric_force, fast_energies, gauge_eval, metric_tensor, scalar_potential, GaugeEval,
};
pub use langevin::{
    homogeneous_solution, simulate, step, ForceMode, InitialVelocity, PhaseState, SimOptions, Trajectory,
};
pub use params::{default_puncture_radius, ModelParams, Vec2};
pub use phase::{accumulate_phase, level_shift, PhaseResult};
pub use predictions::{
    kappa, low_noise_check, mean_shift, msd_prediction, sigma_analytic, sigma_simplified, MsdPrediction, Predictions,
};
pub use rng::StreamFactory;
pub use spectral::{
    adiabaticity_check, correlation_time, energy_spectral_density, periodogram, transfer_jr, Signal, Spectrum,
    SpectrumKind,
};
pub use validate::{validate, Budget, CheckResult, Report, Settings, Status, Thresholds};
