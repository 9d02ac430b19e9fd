use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure names the invariant or precondition that was violated.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degree {n} exceeds the configured limit {n_max}")]
    DegreeTooLarge { n: usize, n_max: usize },

    #[error("boundary decay violated: max boundary modulus {observed:e} exceeds {limit:e}")]
    BoundaryDecay { observed: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shift {shift} is not commensurate with grid step {step}")]
    OffGridShift { shift: f64, step: f64 },

    #[error("phase-space step {step} does not resolve oscillations over extent {extent} (criterion step*extent <= pi/2)")]
    Resolution { step: f64, extent: f64 },

    #[error("series tail estimate {tail:e} exceeds tolerance {tolerance:e}")]
    DivergentTail { tail: f64, tolerance: f64 },

    #[error("truncation residual {residual:e} exceeds tolerance {tolerance:e}")]
    TruncationResidual { residual: f64, tolerance: f64 },

    #[error("grid [{lo}, {hi}] does not cover the required interval [{need_lo}, {need_hi}]")]
    GridCoverage { lo: f64, hi: f64, need_lo: f64, need_hi: f64 },

    #[error("samples do not decay at the window ends (end modulus {observed:e}); the transform would alias")]
    NonDecaying { observed: f64 },

    #[error("heat kernel tail {tail:e} at the grid edge exceeds {limit:e}")]
    KernelTail { tail: f64, limit: f64 },

    #[error("quadrature box tail estimate {tail:e} exceeds {limit:e}")]
    QuadratureTail { tail: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cannot parse multiplier spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
