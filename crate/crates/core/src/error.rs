use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the runner's exit codes: [`Error::Validation`] and
/// [`Error::Tower`] are input problems, [`Error::ResourceCap`] marks a
/// desk-scale limit, and the remaining variants are numerical or internal
/// consistency failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("tower validation failed at level {level}: {reason}")]
    Tower { level: usize, reason: String },

    #[error("resource cap exceeded: {what} = {requested} exceeds cap {cap}")]
    ResourceCap {
        what: String,
        requested: u128,
        cap: u128,
    },

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("precision failure: {0}")]
    Precision(String),

    #[error("singular curve: {0}")]
    SingularCurve(String),

    #[error("point {point} is within {distance:e} of branch point {branch}")]
    BranchProximity {
        point: String,
        branch: String,
        distance: f64,
    },

    #[error("orientation/convention failure: {0}")]
    Convention(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
