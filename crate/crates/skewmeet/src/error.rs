//! Error types shared across the crate.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter fell outside its mathematical domain.
    #[error("domain error: {name} = {value} must lie in {requirement}")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// A transition-probability denominator degenerated to (numerical) zero.
    #[error("degenerate denominator at ray {index}: {value} <= 1e-14")]
    DegenerateDenominator { index: usize, value: f64 },

    /// The embedded Markov chain has more than one closed communicating
    /// class, so no unique stationary distribution exists.
    #[error("chain is reducible into {closed_classes} closed classes; stationary distribution is not unique")]
    NonUniqueStationary { closed_classes: usize },

    /// None of the explicit boundary/zero permeability cases applies.
    #[error("no special case applies: kappa1 = {kappa1}, kappa2 = {kappa2} are both interior and nonzero")]
    NoSpecialCase { kappa1: f64, kappa2: f64 },

    /// Invalid ray configuration handed to a constructor.
    #[error("invalid ray configuration: {0}")]
    InvalidConfig(String),

    /// Invalid simulation or experiment setup.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, requirement: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            requirement,
        }
    }
}
