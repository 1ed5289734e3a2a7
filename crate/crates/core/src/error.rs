use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by the link model.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside its valid range.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// Two sequences or vectors that must agree in length do not.
    LengthMismatch { what: &'static str, expected: usize, found: usize },
    /// Sample rates or signal domains do not match what the operation needs.
    DomainMismatch(&'static str),
    /// A sequence or profile with zero power where a normalization is needed.
    ZeroPower(&'static str),
    /// A linear system could not be solved.
    Singular(&'static str),
    /// Non-finite input reached the estimator.
    NonFinite(&'static str),
    /// Ideal mode needs the true channels.
    MissingTruth,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => write!(f, "invalid `{name}`: {reason}"),
            Error::LengthMismatch { what, expected, found } => {
                write!(f, "length mismatch for {what}: expected {expected}, found {found}")
            }
            Error::DomainMismatch(what) => write!(f, "domain mismatch: {what}"),
            Error::ZeroPower(what) => write!(f, "zero power in {what}"),
            Error::Singular(what) => write!(f, "singular system in {what}"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::MissingTruth => f.write_str("ideal receiver requires the true channel taps"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { what, expected, found })
    }
}
