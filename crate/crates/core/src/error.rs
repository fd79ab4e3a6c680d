use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates one of the model invariants. `key` names the
    /// offending field so config front ends can report it verbatim.
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: &'static str, reason: String },

    #[error("point at radius {radius:e} lies inside the puncture (radius {epsilon:e})")]
    Puncture { radius: f64, epsilon: f64 },

    #[error("step is unstable: dt*eta/M = {ratio} must be below 0.5")]
    Stability { ratio: f64 },

    #[error("boundary fit is ill-conditioned: eta*T/M = {value:e}")]
    IllConditioned { value: f64 },

    #[error("angle increment {increment} rad at step {step} is too coarse to unwrap")]
    Aliasing { step: usize, increment: f64 },

    #[error("path measure undefined at kT = 0")]
    UndefinedMeasure,

    #[error("{0}")]
    Domain(String),

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("quadrature did not converge to {tolerance:e} (estimate {estimate}, error {error:e})")]
    Quadrature { estimate: f64, error: f64, tolerance: f64 },

    #[error("path aborted at step {step} after {events} puncture events")]
    SimulationAborted { step: usize, events: usize },

    #[error("no paths retained under endpoint conditioning (radius {radius}); {endpoints}")]
    EmptyEnsemble { radius: f64, endpoints: String },
}

impl Error {
    pub(crate) fn param(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            key,
            reason: reason.into(),
        }
    }
}
