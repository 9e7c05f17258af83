//! The exam dataset generator, the four-query benchmark and the exported
//! statistics tables.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{ColumnData, TableSchema};
use crate::error::{Error, Result};
use crate::index::IndexId;
use crate::jit::{Engine, Path, RunMode};
use crate::planner::ScanObject;
use crate::value::ColumnType;

pub const SUBJECT_TABLES: [&str; 5] = [
    "PHYSICSMARKS",
    "CHEMISTRYMARKS",
    "MATHSMARKS",
    "BIOLOGYMARKS",
    "ENGLISHMARKS",
];

pub const MARK_COLUMNS: usize = 65;

pub const EXAM_QUERIES: [&str; 4] = [
    "select * from physicsmarks where m1 = 1",
    "select * from physicsmarks where m1 = 2 and m2 = 1",
    "select * from physicsmarks where m1 = m2",
    "select * from chemistrymarks inner join physicsmarks on chemistrymarks.m1 = physicsmarks.m1",
];

pub const HISTORY_TABLE: &str = "JIT_HISTORY";
pub const EXPLAIN_TABLE: &str = "JIT_EXPLAIN";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub tables: Vec<String>,
    pub rows_per_table: usize,
    /// Inclusive range of every mark.
    pub marks_range: (i64, i64),
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            tables: SUBJECT_TABLES.iter().map(|s| s.to_string()).collect(),
            rows_per_table: 100_000,
            marks_range: (0, 4),
            seed: 42,
        }
    }
}

impl DatasetSpec {
    pub fn with_rows(rows: usize, seed: u64) -> Self {
        DatasetSpec {
            rows_per_table: rows,
            seed,
            ..DatasetSpec::default()
        }
    }
}

/// P_ID, FIRST_NAME, M1..M65, TOTAL, RANK.
pub fn exam_schema(table: &str) -> Result<TableSchema> {
    let mut cols: Vec<(String, ColumnType)> = vec![
        ("P_ID".into(), ColumnType::Int),
        ("FIRST_NAME".into(), ColumnType::Text),
    ];
    cols.extend((1..=MARK_COLUMNS).map(|i| (format!("M{i}"), ColumnType::Int)));
    cols.push(("TOTAL".into(), ColumnType::Int));
    cols.push(("RANK".into(), ColumnType::Int));
    TableSchema::new(table, &cols)
}

fn random_name(rng: &mut ChaCha8Rng) -> Arc<str> {
    let len = rng.gen_range(4..=8);
    let mut s = String::with_capacity(len);
    s.push(rng.gen_range(b'A'..=b'Z') as char);
    for _ in 1..len {
        s.push(rng.gen_range(b'a'..=b'z') as char);
    }
    Arc::from(s)
}

/// Generates every table in `spec` into `engine`. Existing tables of the
/// same name are replaced only when `overwrite` is set.
pub fn generate_dataset(
    engine: &mut Engine,
    spec: &DatasetSpec,
    overwrite: bool,
) -> Result<Vec<String>> {
    let (lo, hi) = spec.marks_range;
    if lo > hi {
        return Err(Error::Config(format!("empty marks range [{lo}, {hi}]")));
    }
    let present: Vec<&String> = spec
        .tables
        .iter()
        .filter(|t| engine.catalog().table(t).is_ok())
        .collect();
    if !present.is_empty() && !overwrite {
        return Err(Error::TablesExist);
    }
    for t in present {
        engine.drop_table(t)?;
    }
    let n = spec.rows_per_table;
    let mut names = Vec::with_capacity(spec.tables.len());
    for (ti, table) in spec.tables.iter().enumerate() {
        let seed = spec
            .seed
            .wrapping_add((ti as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<i64> = (1..=n as i64).collect();
        let first: Vec<Arc<str>> = (0..n).map(|_| random_name(&mut rng)).collect();
        let mut marks: Vec<Vec<i64>> = Vec::with_capacity(MARK_COLUMNS);
        for _ in 0..MARK_COLUMNS {
            marks.push((0..n).map(|_| rng.gen_range(lo..=hi)).collect());
        }
        let total: Vec<i64> = (0..n).map(|r| marks.iter().map(|m| m[r]).sum()).collect();
        let distinct: Vec<i64> = total
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .rev()
            .collect();
        let rank: Vec<i64> = total
            .iter()
            .map(|t| {
                distinct
                    .binary_search_by(|d| t.cmp(d))
                    .expect("total present") as i64
                    + 1
            })
            .collect();

        let schema = exam_schema(table)?;
        let name = schema.name().to_string();
        engine.create_table(schema)?;
        let mut cols = vec![ColumnData::Int(ids), ColumnData::Text(first)];
        cols.extend(marks.into_iter().map(ColumnData::Int));
        cols.push(ColumnData::Int(total));
        cols.push(ColumnData::Int(rank));
        engine.append_columns(&name, cols)?;
        names.push(name);
    }
    Ok(names)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub sql: String,
    pub cost_without_jit: f64,
    pub cost_with_jit: f64,
    pub index_created: Option<IndexId>,
    pub scan_object_before: ScanObject,
    pub scan_object_after: ScanObject,
    pub path_first: Path,
    pub path_second: Path,
    /// False when the result was too large to materialize and the query
    /// was only compiled.
    pub executed: bool,
    pub wall_ms_first: f64,
    pub wall_ms_second: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Every EXPLAIN produced during the run, in order.
    pub explains: Vec<String>,
}

impl BenchReport {
    /// Every column except wall-clock times, one line per query.
    pub fn cost_columns(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}|{:.4}|{:.4}|{}|{}|{}|{}|{}|{}",
                r.sql,
                r.cost_without_jit,
                r.cost_with_jit,
                r.index_created.as_ref().map_or("-", |i| i.as_str()),
                r.scan_object_before,
                r.scan_object_after,
                r.path_first,
                r.path_second,
                r.executed
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record([
            "QUERY",
            "COST_WITHOUT_JIT",
            "COST_WITH_JIT",
            "INDEX_CREATED",
            "SCAN_OBJECT_BEFORE",
            "SCAN_OBJECT_AFTER",
            "PATH_FIRST",
            "PATH_SECOND",
            "EXECUTED",
            "WALL_MS_FIRST",
            "WALL_MS_SECOND",
        ]);
        for r in &self.rows {
            let _ = w.write_record([
                r.sql.clone(),
                format!("{:.4}", r.cost_without_jit),
                format!("{:.4}", r.cost_with_jit),
                r.index_created
                    .as_ref()
                    .map_or("-".into(), |i| i.to_string()),
                r.scan_object_before.to_string(),
                r.scan_object_after.to_string(),
                r.path_first.to_string(),
                r.path_second.to_string(),
                r.executed.to_string(),
                format!("{:.3}", r.wall_ms_first),
                format!("{:.3}", r.wall_ms_second),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }

    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<4} {:>14} {:>14} {:>7} {:<6} {:<6} {:<24} {:>10} {:>10}\n",
            "Q",
            "cost_no_jit",
            "cost_jit",
            "ratio",
            "before",
            "after",
            "index",
            "ms_first",
            "ms_second"
        );
        for (i, r) in self.rows.iter().enumerate() {
            let ratio = if r.cost_without_jit > 0.0 {
                r.cost_with_jit / r.cost_without_jit
            } else {
                1.0
            };
            let _ = writeln!(
                out,
                "{:<4} {:>14.4} {:>14.4} {:>7.4} {:<6} {:<6} {:<24} {:>10.3} {:>10.3}{}",
                format!("Q{}", i + 1),
                r.cost_without_jit,
                r.cost_with_jit,
                ratio,
                r.scan_object_before,
                r.scan_object_after,
                r.index_created.as_ref().map_or("-", |x| x.as_str()),
                r.wall_ms_first,
                r.wall_ms_second,
                if r.executed { "" } else { "  (compile-only)" }
            );
        }
        out
    }
}

/// Runs the four exam queries once each with JIT off on an empty registry,
/// then twice each (cold, warm) with JIT on. Queries whose estimated result
/// exceeds the configured row cap are compiled but not executed.
pub fn run_benchmark(engine: &mut Engine) -> Result<BenchReport> {
    for t in ["PHYSICSMARKS", "CHEMISTRYMARKS"] {
        if engine.catalog().table(t).is_err() {
            return Err(Error::DatasetMissing);
        }
    }
    let saved = engine.config().enabled;
    let out = bench_inner(engine);
    engine.set_enabled(saved);
    out
}

fn bench_inner(engine: &mut Engine) -> Result<BenchReport> {
    let cap = engine.config().max_result_rows as f64;
    let mut modes = Vec::new();
    for q in EXAM_QUERIES {
        let est = engine.explain(q)?.chosen_plan.out_rows;
        modes.push(if est > cap {
            RunMode::CompileOnly
        } else {
            RunMode::Execute
        });
    }

    engine.reset_jit();
    engine.set_enabled(false);
    let mut before = Vec::new();
    for (q, &mode) in EXAM_QUERIES.iter().zip(&modes) {
        let o = engine.process_query_mode(q, mode)?;
        before.push((o.indexed_cost.pages, o.explain.scan_object));
    }
    let mut explains: Vec<String> = engine.explains().iter().map(|e| e.render()).collect();

    engine.reset_jit();
    engine.set_enabled(true);
    let mut rows = Vec::new();
    for ((q, &mode), (cost_before, scan_before)) in EXAM_QUERIES.iter().zip(&modes).zip(before) {
        let t0 = Instant::now();
        let first = engine.process_query_mode(q, mode)?;
        let wall_first = t0.elapsed().as_secs_f64() * 1e3;
        let t1 = Instant::now();
        let second = engine.process_query_mode(q, mode)?;
        let wall_second = t1.elapsed().as_secs_f64() * 1e3;
        rows.push(BenchRow {
            sql: first.query.clone(),
            cost_without_jit: cost_before,
            cost_with_jit: second.indexed_cost.pages,
            index_created: first.created.as_ref().map(|d| d.id.clone()),
            scan_object_before: scan_before,
            scan_object_after: second.explain.scan_object,
            path_first: first.path,
            path_second: second.path,
            executed: mode == RunMode::Execute,
            wall_ms_first: wall_first,
            wall_ms_second: wall_second,
        });
    }
    explains.extend(engine.explains().iter().map(|e| e.render()));
    Ok(BenchReport { rows, explains })
}

/// Schemas of the exported history and explain tables.
pub fn stats_schemas() -> Result<[TableSchema; 2]> {
    use ColumnType::{Int, Text};
    Ok([
        TableSchema::new(
            HISTORY_TABLE,
            &[
                ("SEQ", Int),
                ("QUERY", Text),
                ("A", Int),
                ("B", Int),
                ("TRIGGERED", Int),
                ("PATH", Text),
            ],
        )?,
        TableSchema::new(
            EXPLAIN_TABLE,
            &[
                ("SEQ", Int),
                ("QUERY", Text),
                ("PLAN", Text),
                ("SCAN_OBJECT", Text),
                ("COST", Text),
                ("COST_PAGES", Int),
                ("ROWS", Int),
                ("MODE", Text),
            ],
        )?,
    ])
}

fn csv_path(dir: &FsPath, table: &str) -> std::path::PathBuf {
    dir.join(format!("{table}.csv"))
}

/// Writes the query history and explain log as `JIT_HISTORY.csv` and
/// `JIT_EXPLAIN.csv` under `dir`. Returns the number of data rows written.
pub fn export_stats(engine: &Engine, dir: impl AsRef<FsPath>) -> Result<usize> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let [hist, expl] = stats_schemas()?;

    let path = csv_path(dir, hist.name());
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    w.write_record(hist.column_names())
        .map_err(|e| Error::csv(&path, e))?;
    for (i, h) in engine.history().iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            h.query.clone(),
            h.normalized_cost_a.to_string(),
            h.threshold_b.to_string(),
            u8::from(h.triggered).to_string(),
            h.path.to_string(),
        ])
        .map_err(|e| Error::csv(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let mut written = engine.history().len();

    let path = csv_path(dir, expl.name());
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    w.write_record(expl.column_names())
        .map_err(|e| Error::csv(&path, e))?;
    for (i, r) in engine.explains().iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            r.query.clone(),
            r.chosen_plan.summary(),
            r.scan_object.to_string(),
            format!("{:.4}", r.chosen_plan.cost.pages),
            format!("{:.0}", r.chosen_plan.cost.pages),
            format!("{:.0}", r.chosen_plan.out_rows),
            if r.executed {
                "EXECUTED"
            } else {
                "COMPILE_ONLY"
            }
            .to_string(),
        ])
        .map_err(|e| Error::csv(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written += engine.explains().len();
    Ok(written)
}

/// Loads exported stats CSVs from `dir` as queryable tables, replacing
/// earlier copies.
pub fn load_stats(engine: &mut Engine, dir: impl AsRef<FsPath>) -> Result<usize> {
    let dir = dir.as_ref();
    let mut n = 0;
    for schema in stats_schemas()? {
        let name = schema.name().to_string();
        if engine.catalog().table(&name).is_ok() {
            engine.drop_table(&name)?;
        }
        engine.create_table(schema)?;
        n += engine.load_csv(csv_path(dir, &name), &name)?;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jit::JitConfig;

    #[test]
    fn exam_schema_shape() {
        let s = exam_schema("physicsmarks").unwrap();
        assert_eq!(s.columns().len(), 69);
        assert_eq!(s.row_width_bytes(), 68 * 8 + 32);
    }

    #[test]
    fn small_dataset_invariants() {
        let mut e = Engine::new(JitConfig::default()).unwrap();
        let spec = DatasetSpec::with_rows(500, 7);
        let names = generate_dataset(&mut e, &spec, false).unwrap();
        assert_eq!(names.len(), 5);
        let t = e.catalog().table("physicsmarks").unwrap();
        let total_col = t.schema().column_index("TOTAL").unwrap();
        let rank_col = t.schema().column_index("RANK").unwrap();
        for r in 0..t.row_count() {
            let sum: i64 = (1..=65)
                .map(|m| t.data().value(r, m + 1).as_int().unwrap())
                .sum();
            assert_eq!(t.data().value(r, total_col).as_int(), Some(sum));
        }
        let mut pairs: Vec<(i64, i64)> = (0..t.row_count())
            .map(|r| {
                (
                    t.data().value(r, total_col).as_int().unwrap(),
                    t.data().value(r, rank_col).as_int().unwrap(),
                )
            })
            .collect();
        pairs.sort_by_key(|p| std::cmp::Reverse(p.0));
        pairs.dedup();
        for (i, (_, rank)) in pairs.iter().enumerate() {
            assert_eq!(*rank, i as i64 + 1);
        }
        assert!(matches!(
            generate_dataset(&mut e, &spec, false),
            Err(Error::TablesExist)
        ));
        generate_dataset(&mut e, &DatasetSpec::with_rows(0, 7), true).unwrap();
        assert_eq!(e.catalog().table("mathsmarks").unwrap().row_count(), 0);
    }
}
