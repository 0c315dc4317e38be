use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite: non-positive pivot at index {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigenvalue iteration did not converge after {iterations} iterations (last relative gap {gap:e})")]
    ConvergenceFailure { iterations: usize, gap: f64 },

    #[error("eigenvalue oracle supports dimension <= {max}, got {dim}")]
    OracleSizeExceeded { dim: usize, max: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model `{0}` has no closed-form norms")]
    NoAnalyticForm(String),

    #[error("invalid inputs: {0}")]
    InvalidInputs(String),

    #[error("no sample size up to {cap} met the error threshold (last relative error {last_error})")]
    CapExceeded { cap: usize, last_error: f64 },

    #[error("every trial was censored for model `{model}` at n = {n}")]
    FullyCensored { model: String, n: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid plot: {0}")]
    InvalidPlot(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
