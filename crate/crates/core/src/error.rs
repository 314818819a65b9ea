use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analytics routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dates must be strictly increasing (line {line}: {date} follows {previous})")]
    Ordering {
        line: usize,
        date: String,
        previous: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("insufficient data: need at least {required}, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("prospect is undefined: no probability mass above the mean")]
    UndefinedProspect,

    #[error("beta is undefined: {0}")]
    UndefinedBeta(String),

    #[error("series are not aligned: {0}")]
    Alignment(String),

    #[error("no real solution: {0}")]
    NoRealSolution(String),

    #[error("singular slope: {0}")]
    SingularSlope(String),

    #[error("calibration out of range: a = {value}")]
    CalibrationOutOfRange { value: f64 },

    #[error("degenerate reference point: {0}")]
    DegenerateReference(String),

    #[error("no optimum: {0}")]
    NoOptimum(String),

    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    #[error("singular design: {0}")]
    SingularDesign(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Ordering { .. } => "ordering",
            Error::Domain(_) => "domain",
            Error::EmptyResult(_) => "empty_result",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::UndefinedProspect => "undefined_prospect",
            Error::UndefinedBeta(_) => "undefined_beta",
            Error::Alignment(_) => "alignment",
            Error::NoRealSolution(_) => "no_real_solution",
            Error::SingularSlope(_) => "singular_slope",
            Error::CalibrationOutOfRange { .. } => "calibration_out_of_range",
            Error::DegenerateReference(_) => "degenerate_reference",
            Error::NoOptimum(_) => "no_optimum",
            Error::NoEquilibrium(_) => "no_equilibrium",
            Error::DegenerateTest(_) => "degenerate_test",
            Error::SingularDesign(_) => "singular_design",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
