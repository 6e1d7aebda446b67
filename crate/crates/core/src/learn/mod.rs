//! Shared learners and statistics.
//!
//! One decision-forest implementation backs every classifier in the crate
//! (source adherence, stance, clickbait, weakly supervised quality).

mod eval;
mod forest;
mod stats;

pub use eval::{auc, binary_rates, cross_val_proba, stratified_folds, BinaryRates};
pub use forest::{Forest, ForestParams};
pub use stats::{anova_f, f_survival, rmse, significance_stars, AnovaResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearnError {
    #[error("training data needs at least two classes, found {0}")]
    SingleClass(usize),
    #[error("training data is empty")]
    Empty,
    #[error("feature matrix is ragged: row {row} has {found} features, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("labels ({labels}) and rows ({rows}) differ in length")]
    LabelCount { labels: usize, rows: usize },
    #[error("ANOVA needs at least two groups")]
    TooFewGroups,
    #[error("ANOVA group {0} has fewer than two values")]
    GroupTooSmall(usize),
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("RMSE of empty vectors is undefined")]
    EmptyVectors,
}
