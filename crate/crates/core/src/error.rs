use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map onto three broad classes used by the CLI exit codes:
/// definite failures, budget exhaustion ("undecided"), and usage errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("division by an enclosure containing zero")]
    DivisionByIntervalContainingZero,
    #[error("logarithm of a non-positive argument")]
    NonPositiveArgument,
    #[error("refinement budget of {budget} steps exhausted")]
    PrecisionCapExceeded { budget: u32 },
    #[error("root isolation failed: {0}")]
    IsolationFailed(String),
    #[error("floor of power could not be decided after {budget} refinements")]
    FloorUndecidable { budget: u32 },
    #[error("index {index} lies beyond the materialized horizon {horizon}")]
    IndexBeyondHorizon { index: usize, horizon: usize },
    #[error("no tail certificate available: {0}")]
    NoCertificate(String),
    #[error("target lies outside the attainable interval")]
    TargetOutsideRange,
    #[error("candidate selection undecided at index {index}")]
    SelectionUndecidable { index: usize },
    #[error("covering violated: {0}")]
    CoverageViolated(String),
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::DivisionByIntervalContainingZero => "DivisionByIntervalContainingZero",
            Error::NonPositiveArgument => "NonPositiveArgument",
            Error::PrecisionCapExceeded { .. } => "PrecisionCapExceeded",
            Error::IsolationFailed(_) => "IsolationFailed",
            Error::FloorUndecidable { .. } => "FloorUndecidable",
            Error::IndexBeyondHorizon { .. } => "IndexBeyondHorizon",
            Error::NoCertificate(_) => "NoCertificate",
            Error::TargetOutsideRange => "TargetOutsideRange",
            Error::SelectionUndecidable { .. } => "SelectionUndecidable",
            Error::CoverageViolated(_) => "CoverageViolated",
            Error::MalformedCertificate(_) => "MalformedCertificate",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
