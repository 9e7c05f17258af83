//! Candidate generation and hypothetical-index selection.
//!
//! Candidate columns are the sargable predicate columns of the triggering
//! query plus the inner join column. They are ranked by usage, cut to `p`,
//! ranked by uniqueness (`ndv / rows`), cut to `m`, and combined into column
//! lists of at most `m_prime` columns per table. Each list is scored by the
//! pages it would save over the query log and kept only when that beats its
//! maintenance cost. The best `t_prime` by savings per maintenance page are
//! costed with hypothetical indexes built from exact statistics.

use std::cmp::Ordering;

use crate::catalog::Catalog;
use crate::cost::{CostEstimate, CostModel};
use crate::error::Result;
use crate::index::{
    estimate_index, IndexDescriptor, IndexId, IndexKind, IndexMode, IndexStats, IndexStore,
};
use crate::jit::config::{JitConfig, UsageOrder};
use crate::planner::{BoundQuery, Planner};
use crate::sql::CompareOp;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateIndex {
    pub table: String,
    pub columns: Vec<String>,
    pub pages_saved_upper_bound: f64,
    pub maintenance_cost: f64,
    pub hypo_stats: Option<IndexStats>,
}

impl CandidateIndex {
    fn ratio(&self) -> f64 {
        if self.maintenance_cost > 0.0 {
            self.pages_saved_upper_bound / self.maintenance_cost
        } else if self.pages_saved_upper_bound > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// A query in the log with the number of times it was submitted.
#[derive(Debug, Clone)]
pub struct LoggedQuery {
    pub query: BoundQuery,
    pub count: u64,
}

/// The winner of [`Indexer::select_best_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub candidate: CandidateIndex,
    pub cost: CostEstimate,
}

#[derive(Debug, Clone, Copy)]
struct Domain {
    pos: usize,
    column: usize,
    /// Served by an equality (or the join key) rather than only by ranges.
    point: bool,
    usage: u64,
    uniqueness: f64,
}

pub struct Indexer<'a> {
    catalog: &'a Catalog,
    cfg: &'a JitConfig,
    model: CostModel,
}

impl<'a> Indexer<'a> {
    pub fn new(catalog: &'a Catalog, cfg: &'a JitConfig) -> Self {
        Indexer {
            catalog,
            cfg,
            model: cfg.cost_model(),
        }
    }

    fn planner(&self) -> Planner<'_> {
        Planner::new(self.catalog, &self.model)
    }

    fn domains(&self, q: &BoundQuery) -> Result<Vec<Domain>> {
        let mut out: Vec<Domain> = Vec::new();
        let mut add = |pos: usize, column: usize, point: bool| -> Result<()> {
            if let Some(d) = out.iter_mut().find(|d| d.pos == pos && d.column == column) {
                d.point |= point;
                return Ok(());
            }
            let t = self.catalog.table(&q.tables[pos])?;
            let s = &t.stats()[column];
            let rows = t.row_count();
            out.push(Domain {
                pos,
                column,
                point,
                usage: s.usage_count,
                uniqueness: if rows == 0 {
                    0.0
                } else {
                    s.ndv as f64 / rows as f64
                },
            });
            Ok(())
        };
        for p in q.predicates.iter().filter(|p| p.sargable()) {
            add(p.lhs.table, p.lhs.column, p.op == CompareOp::Eq)?;
        }
        if let Some((_, inner)) = q.join {
            add(inner.table, inner.column, true)?;
        }
        Ok(out)
    }

    /// Column lists worth costing for `q`, best first. `log` must include
    /// `q` itself; `existing` are the real indexes already available.
    pub fn generate_candidates(
        &self,
        q: &BoundQuery,
        log: &[LoggedQuery],
        conventional: &[IndexDescriptor],
        existing: &[IndexDescriptor],
    ) -> Result<Vec<CandidateIndex>> {
        let mut domains = self.domains(q)?;
        let by_pos = |a: &Domain, b: &Domain| (a.pos, a.column).cmp(&(b.pos, b.column));

        domains.sort_by(|a, b| {
            let usage = match self.cfg.usage_order {
                UsageOrder::MostUsedFirst => b.usage.cmp(&a.usage),
                UsageOrder::LeastUsedFirst => a.usage.cmp(&b.usage),
            };
            usage.then_with(|| by_pos(a, b))
        });
        domains.truncate(self.cfg.p);
        let by_uniqueness = |a: &Domain, b: &Domain| {
            b.uniqueness
                .total_cmp(&a.uniqueness)
                .then(b.usage.cmp(&a.usage))
                .then_with(|| by_pos(a, b))
        };
        domains.sort_by(by_uniqueness);
        domains.truncate(self.cfg.m);

        // Point columns lead so that a range column, if any, can still be
        // used after the equality prefix.
        domains.sort_by(|a, b| b.point.cmp(&a.point).then_with(|| by_uniqueness(a, b)));

        let planner = self.planner();
        let baselines: Vec<f64> = log
            .iter()
            .map(|l| Ok(planner.plan(&l.query, conventional)?.chosen.cost.pages))
            .collect::<Result<_>>()?;

        let mut out = Vec::new();
        for pos in 0..q.tables.len() {
            let cols: Vec<usize> = domains
                .iter()
                .filter(|d| d.pos == pos)
                .map(|d| d.column)
                .collect();
            let t = self.catalog.table(&q.tables[pos])?;
            let maintenance = self
                .model
                .table_pages(t.row_count() as u64, t.schema().row_width_bytes())
                as f64
                / self.cfg.expected_reuse
                + self.cfg.update_cost * self.cfg.update_rate;
            for subset in subsets(&cols, self.cfg.m_prime) {
                let names: Vec<String> = subset
                    .iter()
                    .map(|&c| t.schema().columns()[c].name.clone())
                    .collect();
                if existing
                    .iter()
                    .any(|ix| ix.table == t.name() && ix.columns == names)
                {
                    continue;
                }
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let hypo = IndexDescriptor {
                    id: IndexStore::index_id(
                        t.name(),
                        &names,
                        IndexMode::Hypothetical,
                        IndexKind::Jit,
                    ),
                    table: t.name().to_string(),
                    columns: names.clone(),
                    mode: IndexMode::Hypothetical,
                    kind: IndexKind::Jit,
                    stats: estimate_index(self.catalog, t.name(), &refs, &self.model)?,
                    last_used: 0,
                    created_at: 0,
                };
                let mut with = conventional.to_vec();
                with.push(hypo);
                let mut saved = 0.0;
                for (l, &base) in log.iter().zip(&baselines) {
                    if !l.query.tables.iter().any(|n| n == t.name()) {
                        continue;
                    }
                    let indexed = planner.plan(&l.query, &with)?.chosen.cost.pages;
                    saved += l.count as f64 * (base - indexed).max(0.0);
                }
                if saved < maintenance {
                    continue;
                }
                out.push(CandidateIndex {
                    table: t.name().to_string(),
                    columns: names,
                    pages_saved_upper_bound: saved,
                    maintenance_cost: maintenance,
                    hypo_stats: None,
                });
            }
        }
        out.sort_by(|a, b| {
            b.ratio()
                .total_cmp(&a.ratio())
                .then(
                    b.pages_saved_upper_bound
                        .total_cmp(&a.pages_saved_upper_bound),
                )
                .then(a.columns.len().cmp(&b.columns.len()))
                .then_with(|| (&a.table, &a.columns).cmp(&(&b.table, &b.columns)))
        });
        out.truncate(self.cfg.t_prime);
        Ok(out)
    }

    /// Builds a hypothetical index per candidate, costs `q` against each
    /// one together with `conventional`, drops them all and returns the
    /// cheapest if it beats `unindexed`.
    pub fn select_best_index(
        &self,
        store: &mut IndexStore,
        candidates: &[CandidateIndex],
        q: &BoundQuery,
        conventional: &[IndexDescriptor],
        unindexed: CostEstimate,
    ) -> Result<Option<Selection>> {
        let mut built: Vec<IndexId> = Vec::new();
        let scored = self.score_hypothetical(store, candidates, q, conventional, &mut built);
        for id in &built {
            store.drop_index(id)?;
        }
        let mut scored = scored?;
        scored.sort_by(compare_selection);
        Ok(scored
            .into_iter()
            .next()
            .filter(|s| s.cost.pages < unindexed.pages))
    }

    fn score_hypothetical(
        &self,
        store: &mut IndexStore,
        candidates: &[CandidateIndex],
        q: &BoundQuery,
        conventional: &[IndexDescriptor],
        built: &mut Vec<IndexId>,
    ) -> Result<Vec<Selection>> {
        let planner = self.planner();
        let mut out = Vec::with_capacity(candidates.len());
        for c in candidates {
            let refs: Vec<&str> = c.columns.iter().map(String::as_str).collect();
            let desc = store.build_index(
                self.catalog,
                &c.table,
                &refs,
                IndexMode::Hypothetical,
                IndexKind::Jit,
                &self.model,
            )?;
            built.push(desc.id.clone());
            let mut with = conventional.to_vec();
            with.push(desc.clone());
            let cost = planner.plan(q, &with)?.chosen.cost;
            let mut cand = c.clone();
            cand.hypo_stats = Some(desc.stats);
            out.push(Selection {
                candidate: cand,
                cost,
            });
        }
        Ok(out)
    }
}

/// Lower cost first, then smaller index, fewer columns, column names.
fn compare_selection(a: &Selection, b: &Selection) -> Ordering {
    let size = |s: &Selection| s.candidate.hypo_stats.map_or(0, |h| h.size_bytes);
    a.cost
        .pages
        .total_cmp(&b.cost.pages)
        .then(size(a).cmp(&size(b)))
        .then(a.candidate.columns.len().cmp(&b.candidate.columns.len()))
        .then_with(|| a.candidate.columns.cmp(&b.candidate.columns))
}

/// Non-empty order-preserving subsets of `items` with at most `max` members,
/// smallest first.
fn subsets(items: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 1..=max.min(items.len()) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.iter().map(|&i| items[i]).collect());
            let Some(i) = (0..k).rev().find(|&i| idx[i] != i + items.len() - k) else {
                break;
            };
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}
