use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is rank deficient (Gram condition number {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("column {column} of W*F[{subcarrier}] has zero norm")]
    ZeroColumn { subcarrier: usize, column: usize },

    #[error("retraction hit a zero entry at index {index}")]
    DegenerateStep { index: usize },

    #[error("point is off the constant-modulus manifold at index {index} (|x| = {modulus})")]
    OffManifold { index: usize, modulus: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Errors caused by an unlucky channel or initialization draw. The
    /// experiment harness redraws the realization when it sees one.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::ZeroColumn { .. } | Error::DegenerateStep { .. } | Error::NonFinite(_)
        )
    }
}
