use std::fmt;

use crate::cost::CostEstimate;
use crate::jit::config::{JitConfig, ThresholdMode};

/// How a query left [`crate::jit::Engine::process_query`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Path {
    /// JIT switched off; the query ran on its best plan.
    Disabled,
    BelowThreshold,
    ScannerHit,
    IndexCreated,
    IndexRejected,
}

impl Path {
    pub fn as_str(self) -> &'static str {
        match self {
            Path::Disabled => "disabled",
            Path::BelowThreshold => "below-threshold",
            Path::ScannerHit => "scanner-hit",
            Path::IndexCreated => "index-created",
            Path::IndexRejected => "index-rejected",
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryHistoryEntry {
    pub query: String,
    pub normalized_cost_a: u64,
    pub threshold_b: u64,
    pub timestamp: u64,
    pub triggered: bool,
    pub path: Path,
}

/// `ceil(pages / norm_unit)`.
pub fn normalized_cost(cost: CostEstimate, cfg: &JitConfig) -> u64 {
    (cost.pages / cfg.norm_unit).ceil().max(0.0) as u64
}

/// The static threshold, or in dynamic mode the rounded mean of the
/// normalized costs in `history` (static value when it is empty).
pub fn current_threshold(cfg: &JitConfig, history: &[QueryHistoryEntry]) -> u64 {
    match cfg.threshold_mode {
        ThresholdMode::Static => cfg.static_threshold,
        ThresholdMode::Dynamic if history.is_empty() => cfg.static_threshold,
        ThresholdMode::Dynamic => {
            let sum: u64 = history.iter().map(|h| h.normalized_cost_a).sum();
            (sum as f64 / history.len() as f64).round() as u64
        }
    }
}
