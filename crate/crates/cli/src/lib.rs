//! Command-line driver for the jitdb engine: argument handling, a line
//! oriented REPL, and one-shot query and benchmark modes.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use jitdb::harness::{self, DatasetSpec};
use jitdb::{Engine, ExecutionOutcome, IndexKind, JitConfig, ResultSet, RunMode};

/// Rows printed for a result before it is truncated.
pub const PRINT_ROWS: usize = 20;

pub const EXIT_OK: i32 = 0;
pub const EXIT_QUERY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const USAGE: &str = "\
commands:
  <sql>                 run a query through the JIT loop
  \\explain <sql>        show the plan without executing
  \\indexes              list live indexes
  \\stats                column statistics and usage counts
  \\gen <rows> <seed>    regenerate the exam tables
  \\jit on|off           switch the JIT layer
  \\bench                run the four exam queries
  \\q                    quit";

#[derive(Debug, Parser)]
#[command(
    name = "jitdb",
    version,
    about = "Relational engine with just-in-time indexing"
)]
pub struct Args {
    /// Directory holding the persisted catalog. Loaded if present, otherwise
    /// the generated dataset is saved there.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Rows per generated table.
    #[arg(long, default_value_t = 100_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// File of `key = value` lines applied before the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// on|off
    #[arg(long)]
    pub jit: Option<String>,
    #[arg(long)]
    pub threshold: Option<u64>,
    /// static|dynamic
    #[arg(long)]
    pub threshold_mode: Option<String>,
    #[arg(long)]
    pub norm_unit: Option<f64>,
    #[arg(long)]
    pub capacity: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub mprime: Option<usize>,
    #[arg(long)]
    pub tprime: Option<usize>,
    #[arg(long)]
    pub fetch_factor: Option<f64>,
    /// Any config key, e.g. `--set usage_order=ascending`. Repeatable and
    /// applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Run the benchmark and exit.
    #[arg(long)]
    pub bench: bool,
    /// Write history and explain stats as CSV into this directory on exit.
    #[arg(long)]
    pub export_stats: Option<PathBuf>,
    /// Run one query and exit.
    #[arg(long)]
    pub sql: Option<String>,
    /// With --sql, plan the query without executing it.
    #[arg(long)]
    pub compile_only: bool,
}

impl Args {
    pub fn jit_config(&self) -> jitdb::Result<JitConfig> {
        let mut cfg = match &self.config {
            Some(path) => JitConfig::from_file(path)?,
            None => JitConfig::default(),
        };
        let flags: [(&str, Option<String>); 10] = [
            ("jit", self.jit.clone()),
            ("threshold", self.threshold.map(|v| v.to_string())),
            ("threshold_mode", self.threshold_mode.clone()),
            ("norm_unit", self.norm_unit.map(|v| v.to_string())),
            ("capacity", self.capacity.map(|v| v.to_string())),
            ("p", self.p.map(|v| v.to_string())),
            ("m", self.m.map(|v| v.to_string())),
            ("m_prime", self.mprime.map(|v| v.to_string())),
            ("t_prime", self.tprime.map(|v| v.to_string())),
            ("fetch_factor", self.fetch_factor.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| jitdb::Error::Config(format!("--set {kv}: expected key=value")))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Continue,
    Quit,
}

/// An engine plus the dataset parameters the REPL regenerates from.
pub struct Repl {
    engine: Engine,
    data_dir: Option<PathBuf>,
}

impl Repl {
    pub fn new(engine: Engine, data_dir: Option<PathBuf>) -> Self {
        Repl { engine, data_dir }
    }

    /// Opens the catalog in `args.data_dir` or generates a fresh dataset.
    pub fn from_args(args: &Args) -> anyhow::Result<Self> {
        let cfg = args.jit_config()?;
        let engine = match &args.data_dir {
            Some(dir) if jitdb::Catalog::exists_at(dir) => {
                Engine::open(dir, cfg).with_context(|| format!("opening {}", dir.display()))?
            }
            _ => {
                let mut e = Engine::new(cfg)?;
                harness::generate_dataset(
                    &mut e,
                    &DatasetSpec::with_rows(args.rows, args.seed),
                    false,
                )?;
                if let Some(dir) = &args.data_dir {
                    e.save(dir)
                        .with_context(|| format!("saving to {}", dir.display()))?;
                }
                e
            }
        };
        Ok(Repl::new(engine, args.data_dir.clone()))
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    /// Runs one input line. Errors are returned to the caller, which prints
    /// them and carries on.
    pub fn execute_line(&mut self, line: &str, out: &mut dyn Write) -> anyhow::Result<Step> {
        let line = line.trim();
        if line.is_empty() {
            return Ok(Step::Continue);
        }
        let Some(meta) = line.strip_prefix('\\') else {
            let outcome = self.engine.process_query(line)?;
            write_outcome(out, &outcome)?;
            return Ok(Step::Continue);
        };
        let (cmd, rest) = meta.split_once(char::is_whitespace).unwrap_or((meta, ""));
        let rest = rest.trim();
        match cmd {
            "q" | "quit" => return Ok(Step::Quit),
            "explain" => {
                if rest.is_empty() {
                    anyhow::bail!("usage: \\explain <sql>");
                }
                write!(out, "{}", self.engine.explain(rest)?)?;
            }
            "indexes" => self.write_indexes(out)?,
            "stats" => self.write_stats(out)?,
            "gen" => {
                let mut parts = rest.split_whitespace();
                let (Some(rows), Some(seed), None) = (parts.next(), parts.next(), parts.next())
                else {
                    anyhow::bail!("usage: \\gen <rows> <seed>");
                };
                let rows: usize = rows
                    .parse()
                    .context("rows must be a non-negative integer")?;
                let seed: u64 = seed
                    .parse()
                    .context("seed must be a non-negative integer")?;
                let tables = harness::generate_dataset(
                    &mut self.engine,
                    &DatasetSpec::with_rows(rows, seed),
                    true,
                )?;
                if let Some(dir) = &self.data_dir {
                    self.engine.save(dir)?;
                }
                writeln!(
                    out,
                    "generated {} tables with {rows} rows each",
                    tables.len()
                )?;
            }
            "jit" => {
                let on = match rest.to_ascii_lowercase().as_str() {
                    "on" => true,
                    "off" => false,
                    _ => anyhow::bail!("usage: \\jit on|off"),
                };
                self.engine.set_enabled(on);
                writeln!(out, "jit {}", if on { "on" } else { "off" })?;
            }
            "bench" => {
                let report = harness::run_benchmark(&mut self.engine)?;
                write!(out, "{}", report.render_table())?;
            }
            _ => writeln!(out, "unknown command `\\{cmd}`\n{USAGE}")?,
        }
        Ok(Step::Continue)
    }

    fn write_indexes(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let indexes = self.engine.indexes();
        if indexes.is_empty() {
            return writeln!(out, "no indexes");
        }
        writeln!(
            out,
            "{:<32} {:<12} {:>10} {:>10} {:>10}",
            "index", "kind", "keys", "last_used", "created"
        )?;
        for d in indexes {
            writeln!(
                out,
                "{:<32} {:<12} {:>10} {:>10} {:>10}",
                d.id.as_str(),
                match d.kind {
                    IndexKind::Conventional => "conventional",
                    IndexKind::Jit => "jit",
                },
                d.stats.key_ndv,
                d.last_used,
                d.created_at
            )?;
        }
        Ok(())
    }

    fn write_stats(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(
            out,
            "{:<16} {:<12} {:>8} {:>12} {:>12} {:>6}",
            "table", "column", "ndv", "min", "max", "used"
        )?;
        for t in self.engine.catalog().tables() {
            for (c, s) in t.schema().columns().iter().zip(t.stats()) {
                let bound = |v: Option<i64>| v.map_or("-".to_string(), |v| v.to_string());
                writeln!(
                    out,
                    "{:<16} {:<12} {:>8} {:>12} {:>12} {:>6}",
                    t.name(),
                    c.name,
                    s.ndv,
                    bound(s.min_val),
                    bound(s.max_val),
                    s.usage_count
                )?;
            }
        }
        Ok(())
    }

    /// Reads lines until EOF or `\q`. Per-line errors go to `err`.
    pub fn run(&mut self, input: impl BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
        for line in input.lines() {
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_CONFIG;
                }
            };
            match self.execute_line(&line, out) {
                Ok(Step::Quit) => break,
                Ok(Step::Continue) => {}
                Err(e) => {
                    let _ = writeln!(err, "error: {e:#}");
                }
            }
            let _ = out.flush();
        }
        EXIT_OK
    }
}

pub fn write_result(out: &mut dyn Write, rs: &ResultSet) -> std::io::Result<()> {
    writeln!(out, "{}", rs.columns.join("\t"))?;
    for row in rs.rows().take(PRINT_ROWS) {
        let cells: Vec<String> = row.0.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", cells.join("\t"))?;
    }
    if rs.len() > PRINT_ROWS {
        writeln!(out, "... {} more", rs.len() - PRINT_ROWS)?;
    }
    writeln!(out, "({} rows)", rs.len())
}

pub fn write_outcome(out: &mut dyn Write, o: &ExecutionOutcome) -> std::io::Result<()> {
    match &o.result {
        Some(rs) => write_result(out, rs)?,
        None => write!(out, "{}", o.explain)?,
    }
    writeln!(
        out,
        "jit: path={} A={} B={} cost={:.4} unindexed={:.4} index={}",
        o.path,
        o.normalized_cost_a,
        o.threshold_b,
        o.indexed_cost.pages,
        o.unindexed_cost_c.pages,
        o.index_used.as_ref().map_or("-", |i| i.as_str())
    )?;
    for e in &o.evicted {
        writeln!(out, "jit: evicted {}", e.id)?;
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<jitdb::Error>() {
        Some(err) if err.is_query_error() => EXIT_QUERY,
        _ => EXIT_CONFIG,
    }
}

/// Runs the program for already parsed arguments and returns the exit code.
pub fn run(args: &Args, input: impl BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut repl = match Repl::from_args(args) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    let code = match (&args.sql, args.bench) {
        (Some(sql), _) => {
            let mode = if args.compile_only {
                RunMode::CompileOnly
            } else {
                RunMode::Execute
            };
            let result = repl
                .engine
                .process_query_mode(sql, mode)
                .map_err(anyhow::Error::from)
                .and_then(|o| Ok(write_outcome(out, &o)?));
            finish(result, err)
        }
        (None, true) => {
            let result = harness::run_benchmark(&mut repl.engine)
                .map_err(anyhow::Error::from)
                .and_then(|r| {
                    write!(out, "{}", r.render_table())?;
                    for explain in &r.explains {
                        write!(out, "{explain}")?;
                    }
                    Ok(())
                });
            finish(result, err)
        }
        (None, false) => repl.run(input, out, err),
    };
    if let Some(dir) = &args.export_stats {
        if let Err(e) = harness::export_stats(repl.engine(), dir) {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    }
    code
}

fn finish(result: anyhow::Result<()>, err: &mut dyn Write) -> i32 {
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}
