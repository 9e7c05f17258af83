//! Fixtures shared by the criterion benchmarks.

use jitdb::harness::{generate_dataset, DatasetSpec};
use jitdb::{Engine, JitConfig};

/// An engine holding the exam tables at `rows` rows each, JIT enabled.
pub fn exam_engine(rows: usize, seed: u64) -> Engine {
    let mut engine = Engine::new(JitConfig::default()).expect("default config is valid");
    generate_dataset(&mut engine, &DatasetSpec::with_rows(rows, seed), false)
        .expect("fresh engine has no tables");
    engine
}
