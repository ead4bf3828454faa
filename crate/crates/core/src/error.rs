use thiserror::Error;

/// Which party a local check failed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Party {
    Alice,
    Bob,
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Party::Alice => f.write_str("A"),
            Party::Bob => f.write_str("B"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("local covariance of mode {party} violates the uncertainty relation (det = {det}, psd = {psd})")]
    LocalUncertaintyViolation { party: Party, det: f64, psd: bool },

    #[error("variance {0} is below the vacuum level 1")]
    BadVariance(f64),

    #[error("transmissivity {0} is outside [0, 1]")]
    BadTransmissivity(f64),

    #[error("parameter {name} = {value} is out of range")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("local covariance of mode {party} is not diagonal (off-diagonal {off_diagonal})")]
    NotStandardForm { party: Party, off_diagonal: f64 },

    #[error("symplectic spectrum radicand is negative ({0}); input is not a covariance matrix")]
    NegativeRadicand(f64),

    #[error("matrix has negative squared symplectic eigenvalue ({0})")]
    IndefiniteMatrix(f64),

    #[error("correlations do not admit a bipartite quantum state")]
    NotASpatialState,

    #[error("general-noise oracle needs a strictly atemporal direction (f = 0 here)")]
    NotApplicable,

    #[error("bivariate marginal for setting ({a}, {b}) has negative eigenvalue {min_eigenvalue}")]
    UnsamplableMarginal {
        a: &'static str,
        b: &'static str,
        min_eigenvalue: f64,
    },

    #[error("need at least 2 samples per setting, got {0}")]
    InsufficientSamples(usize),

    #[error("missing batch for setting ({a}, {b})")]
    MissingSetting { a: &'static str, b: &'static str },

    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LocalUncertaintyViolation { .. } => "LocalUncertaintyViolation",
            Error::BadVariance(_) => "BadVariance",
            Error::BadTransmissivity(_) => "BadTransmissivity",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::NotStandardForm { .. } => "NotStandardForm",
            Error::NegativeRadicand(_) => "NegativeRadicand",
            Error::IndefiniteMatrix(_) => "IndefiniteMatrix",
            Error::NotASpatialState => "NotASpatialState",
            Error::NotApplicable => "NotApplicable",
            Error::UnsamplableMarginal { .. } => "UnsamplableMarginal",
            Error::InsufficientSamples(_) => "InsufficientSamples",
            Error::MissingSetting { .. } => "MissingSetting",
            Error::InvalidDescriptor(_) => "InvalidDescriptor",
            Error::Json(_) => "Json",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
