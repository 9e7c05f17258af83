//! Just-in-time indexing: an alert that compares a query's estimated cost
//! with a threshold, a scanner that looks for an existing index, and an
//! indexer that picks, builds and ages temporary indexes.

pub mod alert;
pub mod config;
pub mod engine;
pub mod indexer;
pub mod registry;

pub use alert::{current_threshold, normalized_cost, Path, QueryHistoryEntry};
pub use config::{JitConfig, ThresholdMode, UsageOrder};
pub use engine::{
    query_hash, Advice, Engine, ExecutionOutcome, JitEvent, LedgerEntry, LedgerItem, Phase, RunMode,
};
pub use indexer::{CandidateIndex, Indexer, LoggedQuery, Selection};
pub use registry::{evict_if_needed, IndexRegistry};
