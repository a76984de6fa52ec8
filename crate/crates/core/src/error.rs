use thiserror::Error;

pub type Result<T> = std::result::Result<T, CstError>;

#[derive(Debug, Error)]
pub enum CstError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix residual {residual:e} exceeds tolerance {tolerance:e} ({what})")]
    MatrixResidual {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("spin with 2j = {twice_spin} exceeds the supported maximum 2j = {max}")]
    SpinTooLarge { twice_spin: u32, max: u32 },

    #[error("grid too small in the {factor} factor: {detail}")]
    GridTooSmall { factor: &'static str, detail: String },

    #[error("quadrature truncation radius {radius} is too small for hbar = {hbar} (needs {required})")]
    TruncationMismatch { radius: f64, required: f64, hbar: f64 },

    #[error("heat kernel tail bound {tail:e} exceeds {limit:e} at cutoff {cutoff} (hbar = {hbar})")]
    TailBoundViolated {
        hbar: f64,
        cutoff: f64,
        tail: f64,
        limit: f64,
    },

    #[error("inverse transform would amplify coefficient of c_R = {casimir} to {amplified:e} (limit {limit:e})")]
    Amplification { casimir: f64, amplified: f64, limit: f64 },

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("certification failed: max error {max_error:e} above tolerance {tolerance:e} ({worst})")]
    Certification {
        max_error: f64,
        tolerance: f64,
        worst: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CstError::NonPositive { name, value })
    }
}
