//! Rank-sum test, correlation test, normalised OLS and the hypothesis
//! suite that drives them.

pub mod correlation;
pub mod dist;
pub mod ols;
pub mod rank;
pub mod suite;

use core::fmt;

pub use correlation::{pearson_test, CorrelationResult};
pub use ols::{ols, ols_normalized, z_scores, RegressionResult};
pub use rank::{mann_whitney, RankMethod, RankTestResult};
pub use suite::{hypothesis_suite, EntryStatus, HypothesisEntry, HypothesisMethod, SuiteConfig, SuiteReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StatsError {
    EmptyGroup,
    LengthMismatch,
    TooFewObservations { needed: usize, got: usize },
    ZeroVariance,
    Collinear,
    NonFinite,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::EmptyGroup => f.write_str("a group is empty"),
            StatsError::LengthMismatch => f.write_str("inputs differ in length"),
            StatsError::TooFewObservations { needed, got } => write!(f, "needs at least {needed} observations, got {got}"),
            StatsError::ZeroVariance => f.write_str("an input has zero variance"),
            StatsError::Collinear => f.write_str("regressors are collinear or constant"),
            StatsError::NonFinite => f.write_str("input contains a non-finite value"),
        }
    }
}

impl core::error::Error for StatsError {}
