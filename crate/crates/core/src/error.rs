use thiserror::Error;

use crate::train::TrainReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite state at node {node}")]
    Divergence { node: usize },

    #[error("growth bound violated at node {node}: |x| = {norm:e} > {bound:e}")]
    BoundViolation { node: usize, norm: f64, bound: f64 },

    #[error("constraint violated at node {node}: |u| = {norm} > M = {bound}")]
    Constraint { node: usize, norm: f64, bound: f64 },

    #[error("rank-deficient basis at node {node}: smallest singular value {sigma_min:e} (largest {sigma_max:e})")]
    RankDeficient { node: usize, sigma_min: f64, sigma_max: f64 },

    #[error("training aborted at iteration {iteration}: {reason}")]
    TrainingAborted { iteration: usize, reason: String, report: Box<TrainReport> },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
