use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("band limit exceeded: requested lmax {requested}, supported {limit}")]
    BandLimitExceeded { requested: usize, limit: usize },

    #[error("invalid power spectrum at ell={ell}: {reason}")]
    SpectrumInvalid { ell: usize, reason: String },

    #[error("invalid radial covariance at ell={ell}: {reason}")]
    CovarianceInvalid { ell: usize, reason: String },

    #[error("rank-deficient basis: {0}")]
    RankDeficient(String),

    #[error("invalid representation label: {0}")]
    InvalidLabel(String),

    #[error("unsupported group pair: {0}")]
    GroupPairUnsupported(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidArgument,
    FileFormat,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::InvalidLabel(_) | Error::GroupPairUnsupported(_) => {
                ErrorKind::InvalidArgument
            }
            Error::BandLimitExceeded { .. }
            | Error::SpectrumInvalid { .. }
            | Error::CovarianceInvalid { .. }
            | Error::RankDeficient(_) => ErrorKind::Numerical,
            Error::Format(_) => ErrorKind::FileFormat,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
