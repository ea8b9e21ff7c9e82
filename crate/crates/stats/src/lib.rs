//! Statistics for coachd evaluations: word error rate, one-way ANOVA and
//! MANOVA, Tukey HSD, χ² contingency tests, the special functions behind
//! their p-values, and deployment aggregate tables.
//!
//! Everything here is pure and allocation-light; no global state.

pub mod anova;
pub mod chisq;
pub mod deployment;
pub mod descriptive;
pub mod field;
pub mod manova;
pub mod special;
pub mod wer;

use thiserror::Error;

pub use anova::{one_way_anova, tukey_hsd, AnovaResult, TukeyComparison, TukeyResult};
pub use chisq::{chi_square_contingency, retention_test, ChiSquareResult};
pub use deployment::{deployment_table, deployment_table_from_ledger, DeploymentRow, DeploymentTable};
pub use descriptive::{Descriptives, GroupSample};
pub use field::{analyze_conditions, ConditionData, FieldAnalysis, Participant};
pub use manova::{one_way_manova, BivariateGroup, ManovaResult};
pub use special::{chi2_survival, f_survival, studentized_range_survival};
pub use wer::{tokenize_transcript, wer, WerResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("within-group variance is zero")]
    DegenerateVariance,
    #[error("within-group SSCP matrix is singular")]
    SingularWithin,
    #[error("contingency table has a zero row or column total")]
    DegenerateMargins,
    #[error("reference transcript is empty")]
    EmptyReference,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bad CSV input: {0}")]
    Csv(String),
}
