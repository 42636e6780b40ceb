use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("{op}: matrix is not numerically positive definite")]
    NotPositiveDefinite { op: &'static str },

    #[error("autocorrelation is not positive semidefinite: factorization failed with jitter up to {cap:e}")]
    NonPsdAutocorrelation { cap: f64 },

    #[error("frequency {w} rad/slot is outside the spectrum support [{lo}, {hi}]")]
    OutOfSupport { w: f64, lo: f64, hi: f64 },

    #[error("frame has {len} slots but at least {required} are needed")]
    FrameTooShort { len: usize, required: usize },

    #[error("cannot take {requested} training pairs from a set of {available}")]
    SplitOutOfRange { requested: usize, available: usize },

    #[error("{op}: empty data set")]
    EmptySet { op: &'static str },

    #[error("ridge regression with lambda = 0 needs at least one training pair")]
    NoInformation,

    #[error("nudged system is indefinite for alpha = {alpha}; use a smaller |alpha|")]
    IndefiniteNudge { alpha: f64 },

    #[error("equilibrium propagation needs a nonzero alpha")]
    ZeroNudge,

    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

impl Error {
    pub(crate) fn dimension(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension { op, detail: detail.into() }
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }

    /// Re-attributes a factorization failure to the calling operation.
    pub(crate) fn in_op(self, op: &'static str) -> Self {
        match self {
            Error::NotPositiveDefinite { .. } => Error::NotPositiveDefinite { op },
            other => other,
        }
    }
}
