//! Physical parameters of the page-I/O cost model and the modeled index
//! shape formulas shared by the index builder and the planner.

use crate::error::{Error, Result};

/// Physical parameters used by every cost formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub page_size: u64,
    pub fan_out: u64,
    /// Multiplier on heap-page fetches after an index probe; 1.0 models
    /// clustered fetches.
    pub fetch_factor: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            page_size: 8192,
            fan_out: 256,
            fetch_factor: 1.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if self.page_size == 0 {
            return Err(Error::Config("page_size must be positive".into()));
        }
        if self.fan_out < 2 {
            return Err(Error::Config("fan_out must be at least 2".into()));
        }
        if !(self.fetch_factor.is_finite() && self.fetch_factor >= 0.0) {
            return Err(Error::Config(
                "fetch_factor must be a non-negative number".into(),
            ));
        }
        Ok(())
    }

    /// `ceil(bytes / page_size)`, never less than one page.
    pub fn pages_for(&self, bytes: u64) -> u64 {
        bytes.div_ceil(self.page_size).max(1)
    }

    /// Heap pages of a table.
    pub fn table_pages(&self, rows: u64, row_width: u64) -> u64 {
        self.pages_for(rows.saturating_mul(row_width))
    }

    /// `max(1, ceil(log_F(leaf_pages)) + 1)`, computed in integers.
    pub fn index_height(&self, leaf_pages: u64) -> u32 {
        let mut levels = 0u32;
        let mut reach = 1u64;
        while reach < leaf_pages {
            reach = reach.saturating_mul(self.fan_out);
            levels += 1;
        }
        levels + 1
    }
}

/// Estimated page accesses, the engine's only cost unit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct CostEstimate {
    pub pages: f64,
}

impl CostEstimate {
    pub fn new(pages: f64) -> Self {
        debug_assert!(pages >= 0.0);
        CostEstimate { pages }
    }
}

impl std::ops::Add for CostEstimate {
    type Output = CostEstimate;
    fn add(self, rhs: Self) -> Self {
        CostEstimate::new(self.pages + rhs.pages)
    }
}
