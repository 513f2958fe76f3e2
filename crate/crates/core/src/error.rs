use thiserror::Error;

/// Errors raised by the physical model and its solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate wavevector: {0}")]
    DegenerateWavevector(&'static str),

    #[error("singular linear system")]
    Singular,

    #[error("ill-conditioned linear system (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("no unstable mode at theta = {theta_deg:.4} deg")]
    NoUnstableMode { theta_deg: f64 },

    #[error("depth z = {z:e} m lies outside the film [-{depth:e}, 0]")]
    OutsideFilm { z: f64, depth: f64 },

    #[error("{0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
