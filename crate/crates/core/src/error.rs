use thiserror::Error;

use crate::epistemic::{EpistemicError, StructureError};
use crate::experiments::DataError;
use crate::oracle::OracleError;
use crate::rational::ParseRationalError;
use crate::strategies::PayoffError;
use crate::worldmodel::SpecError;

/// Umbrella error for callers that drive several modules at once.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Epistemic(#[from] EpistemicError),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error("invalid player `{0}`: expected 0 or 1")]
    InvalidPlayer(String),
}
