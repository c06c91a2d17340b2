use thiserror::Error;

/// Errors raised by the physics library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates its invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Inputs lie outside the regime where the model is valid.
    #[error("model validity: {0}")]
    ModelValidity(String),

    /// A closed form was evaluated outside its domain (e.g. above threshold).
    #[error("domain error: {0}")]
    Domain(String),

    /// The mode basis is too small for the requested pump harmonic.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A constructed object failed an internal consistency check.
    #[error("internal consistency: {0}")]
    Consistency(String),

    /// A covariance lost physicality during evolution.
    #[error("numerical instability at step {step}: symplectic eigenvalue {eigenvalue:e} < 1/2")]
    NumericalInstability { step: u64, eigenvalue: f64 },

    /// Not enough samples to run a detector or fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::ModelValidity(_) => "model_validity",
            Error::Domain(_) => "domain",
            Error::Truncation(_) => "truncation",
            Error::Consistency(_) => "consistency",
            Error::NumericalInstability { .. } => "numerical_instability",
            Error::InsufficientData(_) => "insufficient_data",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
