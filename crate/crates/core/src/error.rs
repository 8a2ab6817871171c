use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pointwise evaluation unsupported: s = {s} >= 2(p-1)/p = {bound} for p = {p}")]
    PointwiseUnsupported { s: f64, p: f64, bound: f64 },

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("kernel mismatch: {0}")]
    KernelMismatch(String),

    #[error("constraint error: b(u) = {b} is not positive")]
    Constraint { b: f64 },

    #[error("step failure after {backtracks} backtracks (gradient norm {grad_norm:e})")]
    StepFailure { backtracks: usize, grad_norm: f64 },

    #[error("solver diverged: relative energy decrease {rel_decrease:e} over the last 20 iterations after {iters} iterations")]
    SolverDiverged { iters: usize, rel_decrease: f64 },

    #[error("infeasible start: b(w_R) <= 0 for every R in {radii:?}")]
    InfeasibleStart { radii: Vec<f64> },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error in {file} line {line}: {message}")]
    Parse { file: String, line: usize, message: String },

    #[error("schema error in {file}: {message}")]
    Schema { file: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::PointwiseUnsupported { .. }
            | Error::KernelMismatch(_)
            | Error::Constraint { .. } => 2,
            Error::SolverDiverged { .. }
            | Error::Quadrature(_)
            | Error::StepFailure { .. }
            | Error::InfeasibleStart { .. } => 3,
            Error::Config { .. } | Error::Parse { .. } | Error::Schema { .. } | Error::Io { .. } => 1,
        }
    }
}
