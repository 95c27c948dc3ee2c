use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NlsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains {count} non-finite samples (first at index {first})")]
    NonFinite { count: usize, first: usize },

    #[error("field is in {found} space, operation expects {expected} space")]
    WrongDomain {
        expected: &'static str,
        found: &'static str,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("negative-order multiplier is singular on a nonzero mean mode (|mean| = {0:e})")]
    SingularMode(f64),

    #[error("nonlinear phase overflow at amplitude {0:e}")]
    AmplitudeOverflow(f64),

    #[error("kernel |x|^-{power} is not integrable in dimension {dim}")]
    NonIntegrableKernel { power: u32, dim: usize },

    #[error("outside the supported parameter regime: {0}")]
    OutOfRegime(String),

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("configuration has {} violation(s): {}", .0.len(), .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("sample file: {0}")]
    SampleFile(String),
}

pub type Result<T, E = NlsError> = std::result::Result<T, E>;
