//! Error type shared by every module of the workbench.

use std::fmt;

use thiserror::Error;

/// A parameter clause that a [`Params`](crate::functionals::Params) tuple failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `N >= 1`
    DimensionPositive,
    /// `1 <= k <= N`
    KInRange,
    /// `p > 1`
    PAboveOne,
    /// `alpha + k > 0`
    AlphaPlusK,
    /// `0 <= beta`
    BetaNonNegative,
    /// `beta < k`
    BetaBelowK,
    /// `beta <= p`
    BetaAtMostP,
    /// `p < N`
    PBelowN,
    /// `q = p(N - beta)/(N - p)`
    QConsistent,
    /// every parameter finite
    Finite,
}

impl Violation {
    pub const ALL: [Violation; 10] = [
        Violation::DimensionPositive,
        Violation::KInRange,
        Violation::PAboveOne,
        Violation::AlphaPlusK,
        Violation::BetaNonNegative,
        Violation::BetaBelowK,
        Violation::BetaAtMostP,
        Violation::PBelowN,
        Violation::QConsistent,
        Violation::Finite,
    ];

    pub fn clause(self) -> &'static str {
        match self {
            Violation::DimensionPositive => "N ≥ 1",
            Violation::KInRange => "1 ≤ k ≤ N",
            Violation::PAboveOne => "p > 1",
            Violation::AlphaPlusK => "α + k > 0",
            Violation::BetaNonNegative => "β ≥ 0",
            Violation::BetaBelowK => "β < k",
            Violation::BetaAtMostP => "β ≤ p",
            Violation::PBelowN => "p < N",
            Violation::QConsistent => "q = p(N−β)/(N−p)",
            Violation::Finite => "parameters finite",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.clause())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Invalid(Violation),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("configuration error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
