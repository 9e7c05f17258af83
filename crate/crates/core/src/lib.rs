//! An embedded relational engine with just-in-time adaptive indexing.
//!
//! Queries in a small SQL subset are parsed, planned against a page-I/O
//! cost model and executed over columnar in-memory tables. When a query's
//! estimated cost exceeds a threshold, the JIT layer either reuses an
//! existing index or selects, builds and later evicts a temporary one.
//!
//! ```
//! use jitdb::{harness, Engine, JitConfig, Path};
//!
//! let mut engine = Engine::new(JitConfig::default()).unwrap();
//! harness::generate_dataset(&mut engine, &harness::DatasetSpec::with_rows(100_000, 42), false).unwrap();
//! let first = engine.process_query("select * from physicsmarks where m1 = 1").unwrap();
//! assert_eq!(first.path, Path::IndexCreated);
//! let again = engine.process_query("select * from physicsmarks where m1 = 1").unwrap();
//! assert_eq!(again.path, Path::ScannerHit);
//! ```

pub mod catalog;
pub mod cost;
pub mod error;
pub mod exec;
pub mod harness;
pub mod index;
pub mod jit;
pub mod planner;
pub mod sql;
pub mod value;

pub use catalog::{BoundColumn, Catalog, ColumnData, ColumnDef, ColumnStats, Table, TableSchema};
pub use cost::{CostEstimate, CostModel};
pub use error::{Error, Result};
pub use exec::{oracle_execute, Executor, ResultSet};
pub use index::{
    estimate_index, IndexDescriptor, IndexId, IndexKind, IndexMode, IndexStats, IndexStore,
    KeyPredicate,
};
pub use jit::{
    current_threshold, normalized_cost, CandidateIndex, Engine, ExecutionOutcome, IndexRegistry,
    JitConfig, Path, QueryHistoryEntry, RunMode, ThresholdMode,
};
pub use planner::{
    BoundPredicate, BoundQuery, ExplainReport, PlanKind, PlanNode, PlannedQuery, Planner,
    ScanObject,
};
pub use sql::{parse, render, ColumnRef, CompareOp, Operand, Predicate, QueryAst};
pub use value::{ColumnType, Row, Value};
