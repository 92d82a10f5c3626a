use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state has zero norm")]
    ZeroNorm,

    /// Amplitude at the outermost samples exceeds the decay threshold; the
    /// periodic FFT would wrap it around. Enlarge the grid.
    #[error("boundary leak on {what}: edge/peak ratio {ratio:.3e} exceeds {threshold:.1e}")]
    BoundaryLeak {
        what: String,
        ratio: f64,
        threshold: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("convolution lost {fraction:.3e} of its mass outside the output window")]
    AliasingDetected { fraction: f64 },

    #[error("coordinate resampling changed the norm by {0:.3e}")]
    InterpolationError(f64),

    #[error("outcome region has probability {0:.3e}, below the conditioning threshold")]
    EmptyRegion(f64),

    #[error("apparatus state does not factorize (reduced-state purity {purity:.12})")]
    NotFactorized { purity: f64 },

    #[error("apparatus is not predictively optimal: {0}")]
    NotPredictivelyOptimal(String),

    #[error("kernel is not of convolution form (residual {residual:.3e})")]
    FormViolation { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("in scenario `{scenario}`: {source}")]
    InScenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::GridMismatch(msg.into())
    }
}
