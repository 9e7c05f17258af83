use std::collections::BTreeMap;
use std::fmt;
use std::path::Path as FsPath;

use sha2::{Digest, Sha256};

use crate::catalog::{Catalog, ColumnData, TableSchema};
use crate::cost::{CostEstimate, CostModel};
use crate::error::Result;
use crate::exec::{Executor, ResultSet};
use crate::index::{IndexDescriptor, IndexId, IndexKind, IndexMode, IndexStore};
use crate::jit::alert::{current_threshold, normalized_cost, Path, QueryHistoryEntry};
use crate::jit::config::JitConfig;
use crate::jit::indexer::{CandidateIndex, Indexer, LoggedQuery, Selection};
use crate::jit::registry::{evict_if_needed, IndexRegistry};
use crate::planner::{report, BoundQuery, ExplainReport, PlanNode, PlannedQuery, Planner};
use crate::sql::{parse, QueryAst};
use crate::value::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Execute,
    /// Plan, cost and run the JIT machinery, but skip execution.
    CompileOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Alert,
    Scan,
    Index,
    Evict,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Alert => "ALERT",
            Phase::Scan => "SCAN",
            Phase::Index => "INDEX",
            Phase::Evict => "EVICT",
        })
    }
}

/// One line of the JIT event log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JitEvent {
    pub phase: Phase,
    pub query_hash: String,
    pub a: u64,
    pub b: u64,
    pub path: Path,
    pub index: Option<IndexId>,
}

impl fmt::Display for JitEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "JIT {} query={} A={} B={} path={} index={}",
            self.phase,
            self.query_hash,
            self.a,
            self.b,
            self.path,
            self.index.as_ref().map_or("-", |i| i.as_str())
        )
    }
}

/// Short stable hash of canonical query text.
pub fn query_hash(sql: &str) -> String {
    let digest = Sha256::digest(sql.as_bytes());
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum LedgerItem {
    Build(IndexId),
    Query { path: Path, executed: bool },
}

/// Modeled pages charged to a query, either for running it or for building
/// an index on its behalf.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub seq: u64,
    pub query: String,
    pub item: LedgerItem,
    pub pages: f64,
}

#[derive(Debug, Clone)]
pub struct ExecutionOutcome {
    pub query: String,
    pub result: Option<ResultSet>,
    pub unindexed_cost_c: CostEstimate,
    pub indexed_cost: CostEstimate,
    pub normalized_cost_a: u64,
    pub threshold_b: u64,
    pub path: Path,
    pub index_used: Option<IndexId>,
    pub created: Option<IndexDescriptor>,
    pub evicted: Vec<IndexDescriptor>,
    pub plan: PlanNode,
    pub explain: ExplainReport,
}

/// Everything the indexer would decide for a query, without side effects
/// on the registry.
#[derive(Debug, Clone)]
pub struct Advice {
    pub unindexed_cost: CostEstimate,
    pub candidates: Vec<CandidateIndex>,
    pub selection: Option<Selection>,
}

/// The query engine: catalog, indexes, and the JIT alert / scanner /
/// indexer loop around them. `process_query` takes `&mut self`, so one
/// query at a time owns the whole loop.
#[derive(Debug)]
pub struct Engine {
    catalog: Catalog,
    store: IndexStore,
    cfg: JitConfig,
    history: Vec<QueryHistoryEntry>,
    log: BTreeMap<String, (QueryAst, u64)>,
    events: Vec<JitEvent>,
    ledger: Vec<LedgerEntry>,
    explains: Vec<ExplainReport>,
    evictions: Vec<IndexDescriptor>,
    executed_indexes: Vec<IndexId>,
    audit_violations: usize,
    seq: u64,
}

impl Engine {
    pub fn new(cfg: JitConfig) -> Result<Self> {
        Self::with_catalog(Catalog::new(), cfg)
    }

    pub fn with_catalog(catalog: Catalog, cfg: JitConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Engine {
            catalog,
            store: IndexStore::new(),
            cfg,
            history: Vec::new(),
            log: BTreeMap::new(),
            events: Vec::new(),
            ledger: Vec::new(),
            explains: Vec::new(),
            evictions: Vec::new(),
            executed_indexes: Vec::new(),
            audit_violations: 0,
            seq: 0,
        })
    }

    /// Opens the catalog saved in `dir`, or starts empty if there is none.
    pub fn open(dir: impl AsRef<FsPath>, cfg: JitConfig) -> Result<Self> {
        let catalog = if Catalog::exists_at(&dir) {
            Catalog::load(&dir)?
        } else {
            Catalog::new()
        };
        Self::with_catalog(catalog, cfg)
    }

    pub fn save(&self, dir: impl AsRef<FsPath>) -> Result<()> {
        self.catalog.save(dir)
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn config(&self) -> &JitConfig {
        &self.cfg
    }

    pub fn set_config(&mut self, cfg: JitConfig) -> Result<()> {
        cfg.validate()?;
        self.cfg = cfg;
        Ok(())
    }

    pub fn set_enabled(&mut self, on: bool) {
        self.cfg.enabled = on;
    }

    pub fn cost_model(&self) -> CostModel {
        self.cfg.cost_model()
    }

    pub fn history(&self) -> &[QueryHistoryEntry] {
        &self.history
    }

    pub fn events(&self) -> &[JitEvent] {
        &self.events
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn explains(&self) -> &[ExplainReport] {
        &self.explains
    }

    /// Every index evicted so far, in eviction order.
    pub fn evictions(&self) -> &[IndexDescriptor] {
        &self.evictions
    }

    /// Ids of every index an executed plan has referenced.
    pub fn executed_indexes(&self) -> &[IndexId] {
        &self.executed_indexes
    }

    /// Executed plans that referenced something other than a real index.
    pub fn audit_violations(&self) -> usize {
        self.audit_violations
    }

    pub fn hypothetical_count(&self) -> usize {
        self.store.hypothetical_count()
    }

    pub fn registry(&self) -> IndexRegistry {
        IndexRegistry::from_store(&self.store)
    }

    pub fn indexes(&self) -> Vec<IndexDescriptor> {
        self.store.real_descriptors()
    }

    pub fn current_threshold(&self) -> u64 {
        current_threshold(&self.cfg, &self.history)
    }

    /// Drops every index over `table`; their row ids would be stale.
    fn invalidate(&mut self, table: &str) {
        let table = table.to_ascii_uppercase();
        for d in self.store.descriptors() {
            if d.table == table {
                let _ = self.store.drop_index(&d.id);
            }
        }
    }

    pub fn create_table(&mut self, schema: TableSchema) -> Result<()> {
        self.catalog.create_table(schema).map(|_| ())
    }

    pub fn drop_table(&mut self, name: &str) -> Result<()> {
        self.catalog.drop_table(name)?;
        self.invalidate(name);
        Ok(())
    }

    pub fn insert_rows(&mut self, table: &str, rows: Vec<Row>) -> Result<usize> {
        let n = self.catalog.insert_rows(table, rows)?;
        self.invalidate(table);
        Ok(n)
    }

    pub fn append_columns(&mut self, table: &str, columns: Vec<ColumnData>) -> Result<usize> {
        let n = self.catalog.append_columns(table, columns)?;
        self.invalidate(table);
        Ok(n)
    }

    pub fn load_csv(&mut self, path: impl AsRef<FsPath>, table: &str) -> Result<usize> {
        let n = self.catalog.load_csv(path, table)?;
        self.invalidate(table);
        Ok(n)
    }

    /// Builds a conventional (never evicted) index.
    pub fn create_index(&mut self, table: &str, columns: &[&str]) -> Result<IndexDescriptor> {
        let model = self.cost_model();
        self.store.build_index(
            &self.catalog,
            table,
            columns,
            IndexMode::Real,
            IndexKind::Conventional,
            &model,
        )
    }

    pub fn drop_index(&mut self, id: &IndexId) -> Result<IndexDescriptor> {
        self.store.drop_index(id)
    }

    fn conventional(&self) -> Vec<IndexDescriptor> {
        self.store
            .real_descriptors()
            .into_iter()
            .filter(|d| d.kind == IndexKind::Conventional)
            .collect()
    }

    fn bind(&self, sql: &str) -> Result<BoundQuery> {
        let ast = parse(sql)?;
        let model = self.cost_model();
        Planner::new(&self.catalog, &model).bind(&ast)
    }

    /// Compile-only EXPLAIN over every real index. Does not touch history,
    /// usage counts or the registry; the report is kept in the explain log.
    pub fn explain(&mut self, sql: &str) -> Result<ExplainReport> {
        let r = self.explain_pure(sql).map_err(|e| e.in_query(sql))?;
        self.explains.push(r.clone());
        Ok(r)
    }

    fn explain_pure(&self, sql: &str) -> Result<ExplainReport> {
        let q = self.bind(sql)?;
        let model = self.cost_model();
        Planner::new(&self.catalog, &model).explain(&q, &self.store.real_descriptors(), false)
    }

    /// Runs `q` through the planner and executor only, with every real
    /// index available and no JIT activity.
    pub fn run_plain(&self, sql: &str) -> Result<ResultSet> {
        let q = self.bind(sql).map_err(|e| e.in_query(sql))?;
        let model = self.cost_model();
        let planned = Planner::new(&self.catalog, &model)
            .plan(&q, &self.store.real_descriptors())
            .map_err(|e| e.in_query(sql))?;
        self.executor(&model)
            .execute(&planned.chosen)
            .map_err(|e| e.in_query(sql))
    }

    fn executor<'a>(&'a self, model: &'a CostModel) -> Executor<'a> {
        Executor::new(&self.catalog, &self.store, model).with_max_rows(self.cfg.max_result_rows)
    }

    fn logged(&self, extra: Option<&QueryAst>) -> Result<Vec<LoggedQuery>> {
        let model = self.cost_model();
        let planner = Planner::new(&self.catalog, &model);
        let mut out = Vec::with_capacity(self.log.len() + 1);
        for (ast, count) in self.log.values() {
            // Queries over tables that no longer exist cannot be served.
            if let Ok(query) = planner.bind(ast) {
                out.push(LoggedQuery {
                    query,
                    count: *count,
                });
            }
        }
        if let Some(ast) = extra {
            out.push(LoggedQuery {
                query: planner.bind(ast)?,
                count: 1,
            });
        }
        Ok(out)
    }

    /// What the indexer would pick for `sql` given the current log, as if
    /// the query had just been submitted once more. Leaves no state behind.
    pub fn advise(&mut self, sql: &str) -> Result<Advice> {
        let ast = parse(sql).map_err(|e| e.in_query(sql))?;
        let q = self.bind(sql).map_err(|e| e.in_query(sql))?;
        let logged = self.logged(Some(&ast))?;
        let conventional = self.conventional();
        let model = self.cost_model();
        let unindexed = Planner::new(&self.catalog, &model)
            .plan(&q, &conventional)?
            .chosen
            .cost;
        let indexer = Indexer::new(&self.catalog, &self.cfg);
        let existing = self.store.real_descriptors();
        let candidates = indexer.generate_candidates(&q, &logged, &conventional, &existing)?;
        let selection = indexer.select_best_index(
            &mut self.store,
            &candidates,
            &q,
            &conventional,
            unindexed,
        )?;
        Ok(Advice {
            unindexed_cost: unindexed,
            candidates,
            selection,
        })
    }

    pub fn process_query(&mut self, sql: &str) -> Result<ExecutionOutcome> {
        self.process_query_mode(sql, RunMode::Execute)
    }

    /// Alert, scanner and indexer around one query, then execution unless
    /// `mode` is compile-only. Errors carry the query text.
    pub fn process_query_mode(&mut self, sql: &str, mode: RunMode) -> Result<ExecutionOutcome> {
        let ast = parse(sql).map_err(|e| e.in_query(sql))?;
        let canonical = ast.render();
        self.process_ast(ast, mode)
            .map_err(|e| e.in_query(&canonical))
    }

    fn process_ast(&mut self, ast: QueryAst, mode: RunMode) -> Result<ExecutionOutcome> {
        let model = self.cost_model();
        let sql = ast.render();
        let hash = query_hash(&sql);
        Planner::new(&self.catalog, &model).bind(&ast)?;
        self.catalog.record_column_usage(&ast)?;
        let q = Planner::new(&self.catalog, &model).bind(&ast)?;

        let conventional = self.conventional();
        let base = Planner::new(&self.catalog, &model).plan(&q, &conventional)?;
        let c = base.chosen.cost;
        let a = normalized_cost(c, &self.cfg);
        let b = current_threshold(&self.cfg, &self.history);
        let triggered = self.cfg.enabled && a > b;
        self.log
            .entry(sql.clone())
            .or_insert_with(|| (ast.clone(), 0))
            .1 += 1;
        self.seq += 1;

        let mut created = None;
        let mut evicted = Vec::new();
        let mut events = Vec::new();
        let event = |phase, path, index: Option<IndexId>| JitEvent {
            phase,
            query_hash: hash.clone(),
            a,
            b,
            path,
            index,
        };

        let (path, planned): (Path, PlannedQuery) = if !self.cfg.enabled {
            let all = self.plan_all(&q)?;
            (Path::Disabled, all)
        } else if !triggered {
            events.push((Phase::Alert, None));
            (Path::BelowThreshold, base)
        } else {
            events.push((Phase::Alert, None));
            let all = self.plan_all(&q)?;
            if let Some(hit) = all.chosen.indexes().first().map(|id| (*id).clone()) {
                for id in all.chosen.indexes() {
                    self.store.touch(id)?;
                }
                events.push((Phase::Scan, Some(hit)));
                (Path::ScannerHit, all)
            } else {
                events.push((Phase::Scan, None));
                let logged = self.logged(None)?;
                let existing = self.store.real_descriptors();
                let indexer = Indexer::new(&self.catalog, &self.cfg);
                let candidates =
                    indexer.generate_candidates(&q, &logged, &conventional, &existing)?;
                let selection = if candidates.is_empty() {
                    None
                } else {
                    indexer.select_best_index(&mut self.store, &candidates, &q, &conventional, c)?
                };
                match selection {
                    Some(sel) if sel.cost.pages < c.pages => {
                        let cols: Vec<&str> =
                            sel.candidate.columns.iter().map(String::as_str).collect();
                        let desc = self.store.build_index(
                            &self.catalog,
                            &sel.candidate.table,
                            &cols,
                            IndexMode::Real,
                            IndexKind::Jit,
                            &model,
                        )?;
                        let t = self.catalog.table(&desc.table)?;
                        let build =
                            model.table_pages(t.row_count() as u64, t.schema().row_width_bytes());
                        self.ledger.push(LedgerEntry {
                            seq: self.seq,
                            query: sql.clone(),
                            item: LedgerItem::Build(desc.id.clone()),
                            pages: build as f64,
                        });
                        events.push((Phase::Index, Some(desc.id.clone())));
                        evicted = evict_if_needed(&mut self.store, self.cfg.capacity)?;
                        for d in &evicted {
                            events.push((Phase::Evict, Some(d.id.clone())));
                        }
                        created = Some(desc);
                        (Path::IndexCreated, self.plan_all(&q)?)
                    }
                    _ => {
                        events.push((Phase::Index, None));
                        (Path::IndexRejected, base)
                    }
                }
            }
        };

        self.history.push(QueryHistoryEntry {
            query: sql.clone(),
            normalized_cost_a: a,
            threshold_b: b,
            timestamp: self.store.tick(),
            triggered,
            path,
        });
        self.events.extend(
            events
                .into_iter()
                .map(|(phase, index)| event(phase, path, index)),
        );
        self.evictions.extend(evicted.iter().cloned());

        let index_used = match &created {
            Some(d) => Some(d.id.clone()),
            None => planned.chosen.indexes().first().map(|id| (*id).clone()),
        };
        let executed = mode == RunMode::Execute;
        let plan = planned.chosen.clone();
        let explain = report(&q, planned, executed);
        self.explains.push(explain.clone());
        self.ledger.push(LedgerEntry {
            seq: self.seq,
            query: sql.clone(),
            item: LedgerItem::Query { path, executed },
            pages: plan.cost.pages,
        });

        let result = if executed {
            for id in plan.indexes() {
                if !self
                    .store
                    .get(id)
                    .is_some_and(|d| d.mode == IndexMode::Real)
                {
                    self.audit_violations += 1;
                }
                self.executed_indexes.push(id.clone());
            }
            Some(self.executor(&model).execute(&plan)?)
        } else {
            None
        };

        Ok(ExecutionOutcome {
            query: sql,
            result,
            unindexed_cost_c: c,
            indexed_cost: plan.cost,
            normalized_cost_a: a,
            threshold_b: b,
            path,
            index_used,
            created,
            evicted,
            plan,
            explain,
        })
    }

    fn plan_all(&self, q: &BoundQuery) -> Result<PlannedQuery> {
        let model = self.cost_model();
        Planner::new(&self.catalog, &model).plan(q, &self.store.real_descriptors())
    }

    /// Ledger entries charged to `sql` (canonical text).
    pub fn ledger_pages(&self, sql: &str) -> f64 {
        self.ledger
            .iter()
            .filter(|e| e.query == sql)
            .map(|e| e.pages)
            .sum()
    }

    /// Drops every JIT index and forgets history, log, events and ledger.
    /// Tables, statistics and conventional indexes are kept.
    pub fn reset_jit(&mut self) {
        for d in self.registry().live {
            let _ = self.store.drop_index(&d.id);
        }
        self.history.clear();
        self.log.clear();
        self.events.clear();
        self.ledger.clear();
        self.explains.clear();
        self.evictions.clear();
    }

    /// Drops every index, real and hypothetical.
    pub fn drop_all_indexes(&mut self) {
        for d in self.store.descriptors() {
            let _ = self.store.drop_index(&d.id);
        }
    }
}
