use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input row. `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("unknown nutrient `{0}`")]
    UnknownNutrient(String),

    #[error("unknown food `{0}`")]
    UnknownFood(String),

    #[error("unknown concrete function `{0}`")]
    UnknownFunction(String),

    #[error("nutrient `{id}` has no RDA for {sex}")]
    MissingThreshold { id: String, sex: &'static str },

    #[error("nutrient `{id}`: UL {ul} is below RDA {rda}")]
    InconsistentThresholds { id: String, rda: f64, ul: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("weights do not match the evaluated nutrients: {0}")]
    WeightMismatch(String),

    #[error("level 1 is an indifference area, not a curve; use indifference_area")]
    AreaNotCurve,

    #[error("{0}")]
    Guard(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
