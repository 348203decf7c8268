//! Corpus curation: heuristic page filters, embedding-based deduplication
//! and stratified test-set sampling.

mod dedup;
mod filter;
mod labels;
mod sample;

pub use dedup::{dedup_clusters, dedup_two_stage, DEFAULT_DEDUP_THRESHOLD};
pub use filter::{heuristic_filter, FilterReason, FilterVerdict};
pub use labels::{read_labels, Complexity, ContentCategory, LabelError, PageLabel, Platform};
pub use sample::{redundant_quota, stratified_sample, write_worklist, StratumAllocation, StratumKey};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurateError {
    #[error("embedding {id:?} has dimension {found}, expected {expected}")]
    DimensionMismatch { id: String, expected: usize, found: usize },
    #[error("no sampling-eligible pages (quality 2 or 3)")]
    EmptyPopulation,
    #[error("requested {requested} samples but only {available} pages are eligible")]
    TotalExceedsPopulation { requested: usize, available: usize },
}
