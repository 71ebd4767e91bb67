//! Summaries, factorial least-squares models and pairwise contrasts over feature records.

pub mod contrasts;
pub mod describe;
pub mod dist;
pub mod model;
pub mod record;

pub use contrasts::{pairwise_contrasts, welch_t, Contrast, ContrastTable, WelchT};
pub use describe::{
    log_transform, summarize, CellSummary, NonPositiveValue, Scale, ScalePolicy, SummaryTable,
};
pub use model::{fit_factorial, FactorialSpec, ModelFit, Term};
pub use record::{Dv, FeatureRecord};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("no records to analyse")]
    EmptyInput,
    #[error("{n} usable observations for {parameters} parameters")]
    InsufficientData { n: usize, parameters: usize },
    #[error("design is rank deficient; aliased terms: {}", .0.join(", "))]
    RankDeficientDesign(Vec<String>),
}
