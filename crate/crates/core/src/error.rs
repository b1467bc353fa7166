//! Error type shared by every module in the crate.

/// Errors surfaced by capacity, design, reconstruction, and oracle code.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The folded noise power through the prefilter vanishes at some
    /// frequency while signal content remains: the sampled observation would
    /// have unbounded SNR there and the parametric capacity form breaks down.
    #[error("degenerate filter: folded noise denominator vanishes at f = {f}")]
    DegenerateFilter { f: f64 },

    /// Positive power was requested but every parallel channel has zero gain.
    #[error("no usable channel: all gains are zero but requested power {p} > 0")]
    NoUsableChannel { p: f64 },

    /// A matrix handed to the Hermitian eigensolver was not Hermitian.
    #[error("matrix is not Hermitian (largest asymmetry {max_asym:.3e} exceeds {tol:.3e})")]
    NotHermitian { max_asym: f64, tol: f64 },

    /// A Gram matrix that must be inverted for noise whitening is singular:
    /// the filter rows are not right-invertible.
    #[error(
        "singular whitening Gram: smallest eigenvalue {lambda_min:.3e} \
         is below {threshold:.3e} of the largest"
    )]
    SingularWhitening { lambda_min: f64, threshold: f64 },

    /// The sample-covariance matrix of the reconstruction problem could not
    /// be inverted (nor pseudo-inverted) at a frequency carrying signal.
    #[error("singular sample covariance in MMSE reconstruction at f = {f}")]
    SingularK { f: f64 },

    /// Sampling rates, modulation period, and grid resolution are not
    /// commensurate; exact folded quadrature is impossible.
    #[error("incommensurate rates: {message}")]
    IncommensurateRates { message: String },

    /// A channel or sampler description violates a structural precondition
    /// (empty support, unbounded SNR, broken subband layout, ...).
    #[error("invalid channel shape: {message}")]
    InvalidChannelShape { message: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for [`Error::IncommensurateRates`].
    pub fn incommensurate(message: impl Into<String>) -> Self {
        Error::IncommensurateRates {
            message: message.into(),
        }
    }

    /// Convenience constructor for [`Error::InvalidChannelShape`].
    pub fn invalid_shape(message: impl Into<String>) -> Self {
        Error::InvalidChannelShape {
            message: message.into(),
        }
    }
}
