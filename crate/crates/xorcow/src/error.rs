use std::path::PathBuf;

/// Unified error type for the whole crate.
///
/// Numeric kernels only ever fail on domain violations (a probability outside
/// `[0, 1]`, a negative rate, mismatched set sizes); search routines add the
/// bracket failure case, and the reporting layer wraps I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root bracket did not actually straddle the target value.
    ///
    /// Both endpoint evaluations are carried so the caller can widen the
    /// bracket intelligently (or report exactly how infeasible the target is).
    #[error(
        "target {target:.3e} not bracketed on [{lo_db} dB, {hi_db} dB]: \
         P(lo) = {p_lo:.6e}, P(hi) = {p_hi:.6e}"
    )]
    Bracket {
        lo_db: f64,
        hi_db: f64,
        p_lo: f64,
        p_hi: f64,
        target: f64,
    },

    /// Exhaustive link-state enumeration grows as `(classes + 1)^(n(n+1)/2)`
    /// and is only tractable for very small networks.
    #[error("exhaustive enumeration supports n <= {max}, got n = {n}")]
    EnumerationTooLarge { n: usize, max: usize },

    /// An operation was asked to run with a scheme it does not support
    /// (e.g. a Monte Carlo estimate of the frequency-hopping baseline, which
    /// has no per-link realization model).
    #[error("scheme {scheme} is not supported by {operation}")]
    UnsupportedScheme {
        scheme: &'static str,
        operation: &'static str,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by validation code throughout the crate.
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
