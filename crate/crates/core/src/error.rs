use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Equal TE/TM slopes: the phase difference does not depend on frequency.
    #[error("degenerate dispersion model: slope_te == slope_tm")]
    DegenerateModel,

    #[error("domain error: {0}")]
    Domain(String),

    /// The response (or the weak-value denominator) vanishes at or near the point.
    #[error("singularity at (rho={rho}, eta={eta}): |T| = {magnitude:e}")]
    Singularity { rho: f64, eta: f64, magnitude: f64 },

    #[error("finite-difference step too coarse: phase step {phase_step:.3} rad exceeds pi/2")]
    StepTooCoarse { phase_step: f64 },

    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("closed form requires the default scenario (psi_in = psi_f = |1>)")]
    NonDefaultScenario,

    #[error("directional pointer routes disagree by {difference:e}")]
    DirectionalMismatch { difference: f64 },

    #[error(
        "Newton refinement did not converge after {iterations} iterations (|T| = {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton refinement left the trust region around the seed (travelled {distance:.3e})")]
    Diverged { distance: f64 },

    #[error("degenerate zero: {0}")]
    DegenerateZero(String),

    #[error("loop passes too close to a zero near (rho={rho}, eta={eta})")]
    LoopNearZero { rho: f64, eta: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_singularity(&self) -> bool {
        matches!(
            self,
            Error::Singularity { .. } | Error::StepTooCoarse { .. }
        )
    }
}
