//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("block ({0}, {1}) not present in block set")]
    MissingBlock(usize, usize),

    #[error("degenerate block pair ({row}, {col}): sigma_{k}(C) = {sigma:e} below rank tolerance")]
    DegenerateBlock {
        row: usize,
        col: usize,
        k: usize,
        sigma: f64,
    },

    #[error("degenerate stacked block: sigma_{k}(C)/sigma_1(C) = {ratio:e} below rank tolerance")]
    DegenerateSvd { k: usize, ratio: f64 },

    #[error("matrix is singular or rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid query plan: {0}")]
    InvalidPlan(String),

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("required node count is unbounded: G(eps, nu) underflowed to zero")]
    UnboundedNodeRequirement,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
