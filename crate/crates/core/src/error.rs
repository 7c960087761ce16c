use thiserror::Error;

use crate::poly::Monomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: decimal strings, file documents, precision requests, shapes.
    #[error("input error: {0}")]
    Input(String),

    #[error("unknown moment: monomial {0} is not determined by the moment basis")]
    UnknownMoment(Monomial),

    #[error("underdetermined: {0}")]
    Underdetermined(String),

    #[error("empty region")]
    EmptyRegion,

    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
