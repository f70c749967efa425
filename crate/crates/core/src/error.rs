use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a type invariant (negative amplitude, T² > 1, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Integration { estimate: f64, error: f64 },

    /// Post-selection accepts no pulses, so conditional quantities are undefined.
    #[error("post-selection is empty (P(0) + P(1) underflows)")]
    EmptySelection,

    #[error("Fock truncation failed: norm deficit {deficit:e} at n_max = {n_max}")]
    Truncation { n_max: usize, deficit: f64 },

    #[error("amplitude calibration failed: {0}")]
    Calibration(String),

    #[error("degenerate state span: {0}")]
    Degenerate(String),

    /// A computed quantity left its admissible range; this indicates loss of accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Domain(_))
    }
}
