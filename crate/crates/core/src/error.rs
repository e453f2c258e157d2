use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The sample carries no spread, so the requested estimate or
    /// semi-distance does not exist.
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    /// A root could not be bracketed, typically because a user-supplied
    /// function is not strictly increasing on the range that was probed.
    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("confidence level {gamma} must lie in (0, 1)")))
    }
}
