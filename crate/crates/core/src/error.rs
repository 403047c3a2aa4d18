use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of range: {value}")]
    Range { what: &'static str, value: f64 },

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("covariance is not diagonal (off-diagonal element {0:e})")]
    NotDiagonal(f64),

    #[error("displacement is not along the q axis (mean_p = {0:e})")]
    OffAxisDisplacement(f64),

    #[error("negative thermal occupation {0:e}")]
    NegativeThermal(f64),

    #[error("input state is not coherent (covariance differs from vacuum)")]
    NotCoherent,

    #[error("phase density misses unit mass by {0:e}")]
    Normalization(f64),

    #[error("phase density never falls to half maximum before pi")]
    NoHalfCrossing,

    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("function is not unimodal on [{lo}, {hi}]")]
    NotUnimodal { lo: f64, hi: f64 },

    #[error("no finite positive threshold exists for these parameters")]
    NoThreshold,

    #[error("purity is one but its derivative is not zero")]
    SingularPurity,

    #[error("integration did not converge (relative change {change:e} with {points} points)")]
    IntegrationNotConverged { change: f64, points: usize },

    #[error("division by zero")]
    DivisionByZero,
}

impl Error {
    pub(crate) fn range(what: &'static str, value: f64) -> Self {
        Error::Range { what, value }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Normalization(_)
                | Error::NoHalfCrossing
                | Error::NoBracket { .. }
                | Error::NotUnimodal { .. }
                | Error::NoThreshold
                | Error::SingularPurity
                | Error::IntegrationNotConverged { .. }
                | Error::DivisionByZero
        )
    }
}
