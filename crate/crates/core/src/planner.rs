//! Selectivity estimation, page-I/O costing, access-path enumeration and
//! EXPLAIN reports.
//!
//! Every plan is costed in estimated page accesses. Conjunctions assume
//! independent predicates. Column-to-column comparisons are never sargable,
//! so they always end up as residual filters.

use std::fmt;

use crate::catalog::{BoundColumn, Catalog, ColumnStats, Table};
use crate::cost::{CostEstimate, CostModel};
use crate::error::{Error, Result};
use crate::index::{IndexDescriptor, IndexId};
use crate::sql::{CompareOp, Operand, QueryAst};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundOperand {
    Literal(Value),
    Column(BoundColumn),
}

/// A predicate whose column references have been resolved to positions in
/// the query scope (0 = base table, 1 = join table).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPredicate {
    pub lhs: BoundColumn,
    pub op: CompareOp,
    pub rhs: BoundOperand,
}

impl BoundPredicate {
    pub fn sargable(&self) -> bool {
        matches!(self.rhs, BoundOperand::Literal(_))
    }

    pub fn literal(&self) -> Option<&Value> {
        match &self.rhs {
            BoundOperand::Literal(v) => Some(v),
            BoundOperand::Column(_) => None,
        }
    }

    /// Scope position of the single table this predicate touches, or `None`
    /// when it compares columns of both tables.
    pub fn single_table(&self) -> Option<usize> {
        match &self.rhs {
            BoundOperand::Literal(_) => Some(self.lhs.table),
            BoundOperand::Column(c) if c.table == self.lhs.table => Some(c.table),
            BoundOperand::Column(_) => None,
        }
    }
}

/// A query resolved against the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    pub ast: QueryAst,
    /// Actual table names, base first.
    pub tables: Vec<String>,
    /// Join columns as (base side, join side).
    pub join: Option<(BoundColumn, BoundColumn)>,
    pub predicates: Vec<BoundPredicate>,
}

impl BoundQuery {
    pub fn sql(&self) -> String {
        self.ast.render()
    }

    /// Literal predicates on the table at scope position `t`.
    pub fn sargable_on(&self, t: usize) -> impl Iterator<Item = &BoundPredicate> {
        self.predicates
            .iter()
            .filter(move |p| p.sargable() && p.lhs.table == t)
    }

    fn local_to(&self, t: usize) -> Vec<BoundPredicate> {
        self.predicates
            .iter()
            .filter(|p| p.single_table() == Some(t))
            .cloned()
            .collect()
    }

    fn cross_table(&self) -> Vec<BoundPredicate> {
        self.predicates
            .iter()
            .filter(|p| p.single_table().is_none())
            .cloned()
            .collect()
    }
}

/// Equality selectivity is `1/ndv`, or zero for a literal outside the
/// column's min/max. Ranges use the fraction of `[min, max]` they cover,
/// falling back to 1.0 when the span is unknown or degenerate.
pub fn literal_selectivity(op: CompareOp, value: &Value, stats: &ColumnStats) -> f64 {
    let bounds = match (stats.min_val, stats.max_val, value.as_int()) {
        (Some(lo), Some(hi), Some(v)) => Some((lo as f64, hi as f64, v as f64)),
        _ => None,
    };
    match op {
        CompareOp::Eq => match bounds {
            Some((lo, hi, v)) if v < lo || v > hi => 0.0,
            _ => 1.0 / stats.ndv.max(1) as f64,
        },
        _ => match bounds {
            Some((lo, hi, v)) if hi > lo => {
                let covered = match op {
                    CompareOp::Lt | CompareOp::Le => v - lo,
                    _ => hi - v,
                };
                (covered / (hi - lo)).clamp(0.0, 1.0)
            }
            _ => 1.0,
        },
    }
}

/// Column-to-column comparison. Equality uses `1/max(ndv_l, ndv_r)`; other
/// comparisons get the customary one third.
pub fn column_selectivity(op: CompareOp, lhs: &ColumnStats, rhs: &ColumnStats) -> f64 {
    match op {
        CompareOp::Eq => 1.0 / lhs.ndv.max(rhs.ndv).max(1) as f64,
        _ => 1.0 / 3.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanObject {
    Table,
    Index,
}

impl fmt::Display for ScanObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanObject::Table => "Table",
            ScanObject::Index => "Index",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanKind {
    TableScan {
        table: String,
        filter: Vec<BoundPredicate>,
    },
    /// `matched` are served by the probe, `residual` are filtered after it.
    /// As the inner side of a join, the join key is an implicit leading
    /// equality on the first index column.
    IndexScan {
        table: String,
        index: IndexId,
        index_columns: usize,
        matched: Vec<BoundPredicate>,
        residual: Vec<BoundPredicate>,
    },
    NestedLoopJoin {
        outer: Box<PlanNode>,
        inner: Box<PlanNode>,
        outer_col: BoundColumn,
        inner_col: BoundColumn,
        residual: Vec<BoundPredicate>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode {
    pub kind: PlanKind,
    pub cost: CostEstimate,
    pub out_rows: f64,
}

impl PlanNode {
    pub fn label(&self) -> &'static str {
        match self.kind {
            PlanKind::TableScan { .. } => "TABLE_SCAN",
            PlanKind::IndexScan { .. } => "INDEX_SCAN",
            PlanKind::NestedLoopJoin { .. } => "NLJ",
        }
    }

    /// Every index the plan would probe.
    pub fn indexes(&self) -> Vec<&IndexId> {
        match &self.kind {
            PlanKind::TableScan { .. } => Vec::new(),
            PlanKind::IndexScan { index, .. } => vec![index],
            PlanKind::NestedLoopJoin { outer, inner, .. } => {
                let mut v = outer.indexes();
                v.extend(inner.indexes());
                v
            }
        }
    }

    fn index_column_count(&self) -> usize {
        match &self.kind {
            PlanKind::TableScan { .. } => 0,
            PlanKind::IndexScan { index_columns, .. } => *index_columns,
            PlanKind::NestedLoopJoin { outer, inner, .. } => {
                outer.index_column_count() + inner.index_column_count()
            }
        }
    }

    /// Access path of the base table.
    pub fn scan_object(&self) -> ScanObject {
        match &self.kind {
            PlanKind::TableScan { .. } => ScanObject::Table,
            PlanKind::IndexScan { .. } => ScanObject::Index,
            PlanKind::NestedLoopJoin { outer, .. } => outer.scan_object(),
        }
    }

    fn object(&self) -> String {
        match &self.kind {
            PlanKind::TableScan { table, .. } | PlanKind::IndexScan { table, .. } => table.clone(),
            PlanKind::NestedLoopJoin { outer, inner, .. } => {
                format!("{},{}", outer.object(), inner.object())
            }
        }
    }

    fn index_field(&self) -> String {
        match &self.kind {
            PlanKind::TableScan { .. } => "-".into(),
            PlanKind::IndexScan { index, .. } => index.to_string(),
            PlanKind::NestedLoopJoin { outer, inner, .. } => {
                format!("{},{}", outer.index_field(), inner.index_field())
            }
        }
    }

    /// One-line summary: `<KIND> object=<name> index=<id|-> cost=<pages> rows=<n>`.
    pub fn summary(&self) -> String {
        format!(
            "{} object={} index={} cost={:.4} rows={:.0}",
            self.label(),
            self.object(),
            self.index_field(),
            self.cost.pages,
            self.out_rows
        )
    }

    fn rank_key(&self) -> (f64, usize, String) {
        (
            self.cost.pages,
            self.index_column_count(),
            self.index_field(),
        )
    }
}

fn rank_cmp(a: &PlanNode, b: &PlanNode) -> std::cmp::Ordering {
    let (ca, na, ia) = a.rank_key();
    let (cb, nb, ib) = b.rank_key();
    ca.total_cmp(&cb).then(na.cmp(&nb)).then(ia.cmp(&ib))
}

/// The chosen plan plus every alternative that was costed, best first.
#[derive(Debug, Clone)]
pub struct PlannedQuery {
    pub chosen: PlanNode,
    pub alternatives: Vec<PlanNode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainReport {
    pub query: String,
    pub chosen_plan: PlanNode,
    pub alternatives: Vec<(String, CostEstimate)>,
    pub scan_object: ScanObject,
    pub executed: bool,
}

impl ExplainReport {
    pub fn render(&self) -> String {
        let mut out = format!(
            "QUERY {}\nPLAN {}\n",
            self.query,
            self.chosen_plan.summary()
        );
        for (summary, _) in &self.alternatives {
            out.push_str("ALT  ");
            out.push_str(summary);
            out.push('\n');
        }
        out.push_str(if self.executed {
            "MODE EXECUTED\n"
        } else {
            "MODE COMPILE_ONLY\n"
        });
        out
    }
}

impl fmt::Display for ExplainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Result of matching one index against the predicates of one table.
struct IndexMatch {
    matched: Vec<BoundPredicate>,
    residual: Vec<BoundPredicate>,
}

#[derive(Debug, Clone, Copy)]
pub struct Planner<'a> {
    catalog: &'a Catalog,
    model: &'a CostModel,
}

impl<'a> Planner<'a> {
    pub fn new(catalog: &'a Catalog, model: &'a CostModel) -> Self {
        Planner { catalog, model }
    }

    pub fn bind(&self, ast: &QueryAst) -> Result<BoundQuery> {
        let mut tables = Vec::new();
        for t in ast.tables() {
            tables.push(self.catalog.table(&t)?.name().to_string());
        }
        if tables.len() == 2 && tables[0] == tables[1] {
            return Err(Error::Unsupported("self joins".into()));
        }
        let scope: Vec<&str> = tables.iter().map(String::as_str).collect();
        let ty = |b: BoundColumn| -> Result<crate::value::ColumnType> {
            Ok(self.catalog.table(scope[b.table])?.schema().columns()[b.column].ty)
        };

        let join = match &ast.join {
            None => None,
            Some(j) => {
                let l = self.catalog.resolve(&scope, &j.left_col)?;
                let r = self.catalog.resolve(&scope, &j.right_col)?;
                let (outer, inner) = match (l.table, r.table) {
                    (0, 1) => (l, r),
                    (1, 0) => (r, l),
                    _ => {
                        return Err(Error::Unsupported(
                            "join condition must compare one column of each table".into(),
                        ))
                    }
                };
                if ty(outer)? != ty(inner)? {
                    return Err(Error::TypeMismatch(format!(
                        "join columns {} and {} have different types",
                        j.left_col, j.right_col
                    )));
                }
                Some((outer, inner))
            }
        };

        let mut predicates = Vec::with_capacity(ast.where_clause.len());
        for p in &ast.where_clause {
            let lhs = self.catalog.resolve(&scope, &p.lhs)?;
            let rhs = match &p.rhs {
                Operand::Literal(v) => {
                    if v.column_type() != ty(lhs)? {
                        return Err(Error::TypeMismatch(format!(
                            "{} compared with {} literal",
                            p.lhs,
                            v.column_type().name()
                        )));
                    }
                    BoundOperand::Literal(v.clone())
                }
                Operand::Column(c) => {
                    let rc = self.catalog.resolve(&scope, c)?;
                    if ty(rc)? != ty(lhs)? {
                        return Err(Error::TypeMismatch(format!(
                            "{} and {c} have different types",
                            p.lhs
                        )));
                    }
                    BoundOperand::Column(rc)
                }
            };
            predicates.push(BoundPredicate { lhs, op: p.op, rhs });
        }
        Ok(BoundQuery {
            ast: ast.clone(),
            tables,
            join,
            predicates,
        })
    }

    fn table(&self, q: &BoundQuery, pos: usize) -> Result<&'a Table> {
        self.catalog.table(&q.tables[pos])
    }

    fn stats(&self, q: &BoundQuery, c: BoundColumn) -> Result<&'a ColumnStats> {
        Ok(&self.table(q, c.table)?.stats()[c.column])
    }

    /// Selectivity of one bound predicate.
    pub fn selectivity(&self, q: &BoundQuery, p: &BoundPredicate) -> Result<f64> {
        let lhs = self.stats(q, p.lhs)?;
        Ok(match &p.rhs {
            BoundOperand::Literal(v) => literal_selectivity(p.op, v, lhs),
            BoundOperand::Column(c) => column_selectivity(p.op, lhs, self.stats(q, *c)?),
        })
    }

    /// Product of member selectivities.
    pub fn conjunction_selectivity(&self, q: &BoundQuery, preds: &[BoundPredicate]) -> Result<f64> {
        preds
            .iter()
            .try_fold(1.0, |acc, p| Ok(acc * self.selectivity(q, p)?))
    }

    pub fn cost_table_scan(&self, table: &str) -> Result<CostEstimate> {
        let t = self.catalog.table(table)?;
        Ok(CostEstimate::new(self.table_pages(t) as f64))
    }

    fn table_pages(&self, t: &Table) -> u64 {
        self.model
            .table_pages(t.row_count() as u64, t.schema().row_width_bytes())
    }

    /// `height + sel * leaf_pages + sel * table_pages * fetch_factor`.
    pub fn cost_index_scan(&self, index: &IndexDescriptor, sel: f64) -> Result<CostEstimate> {
        let t = self.catalog.table(&index.table)?;
        let sel = sel.clamp(0.0, 1.0);
        let pages = index.stats.height as f64
            + sel * index.stats.leaf_pages as f64
            + sel * self.table_pages(t) as f64 * self.model.fetch_factor;
        Ok(CostEstimate::new(pages))
    }

    /// Walks the index columns: one equality per column extends the prefix,
    /// range comparisons on a column end it. `join_key` names a column that
    /// is bound by an outer row and acts as an equality.
    fn match_index(
        &self,
        q: &BoundQuery,
        pos: usize,
        index: &IndexDescriptor,
        local: &[BoundPredicate],
        join_key: Option<usize>,
    ) -> Result<Option<IndexMatch>> {
        let t = self.table(q, pos)?;
        let mut taken = vec![false; local.len()];
        let mut used_join = false;
        for (i, name) in index.columns.iter().enumerate() {
            let Some(col) = t.schema().column_index(name) else {
                return Ok(None);
            };
            if join_key == Some(col) && i == 0 {
                used_join = true;
                continue;
            }
            let on_col = |want_eq: bool| -> Vec<usize> {
                (0..local.len())
                    .filter(|&k| {
                        !taken[k]
                            && local[k].sargable()
                            && local[k].lhs.column == col
                            && (local[k].op == CompareOp::Eq) == want_eq
                    })
                    .collect()
            };
            if let Some(&k) = on_col(true).first() {
                taken[k] = true;
                continue;
            }
            let ranges = on_col(false);
            for &k in &ranges {
                taken[k] = true;
            }
            break;
        }
        if join_key.is_some() && !used_join {
            return Ok(None);
        }
        if join_key.is_none() && !taken.iter().any(|&b| b) {
            return Ok(None);
        }
        let (matched, residual) =
            local
                .iter()
                .zip(&taken)
                .fold((Vec::new(), Vec::new()), |(mut m, mut r), (p, &tk)| {
                    if tk {
                        m.push(p.clone());
                    } else {
                        r.push(p.clone());
                    }
                    (m, r)
                });
        Ok(Some(IndexMatch { matched, residual }))
    }

    /// Table scan plus every usable index scan for the table at `pos`.
    fn access_paths(
        &self,
        q: &BoundQuery,
        pos: usize,
        indexes: &[IndexDescriptor],
        join_key: Option<usize>,
    ) -> Result<Vec<PlanNode>> {
        let t = self.table(q, pos)?;
        let rows = t.row_count() as f64;
        let local = q.local_to(pos);
        let local_sel = self.conjunction_selectivity(q, &local)?;
        let key_sel = match join_key {
            Some(col) => 1.0 / t.stats()[col].ndv.max(1) as f64,
            None => 1.0,
        };
        let mut paths = vec![PlanNode {
            kind: PlanKind::TableScan {
                table: t.name().to_string(),
                filter: local.clone(),
            },
            cost: CostEstimate::new(self.table_pages(t) as f64),
            out_rows: rows * local_sel * key_sel,
        }];
        for ix in indexes.iter().filter(|ix| ix.table == t.name()) {
            let Some(m) = self.match_index(q, pos, ix, &local, join_key)? else {
                continue;
            };
            let sel = self.conjunction_selectivity(q, &m.matched)? * key_sel;
            paths.push(PlanNode {
                kind: PlanKind::IndexScan {
                    table: t.name().to_string(),
                    index: ix.id.clone(),
                    index_columns: ix.columns.len(),
                    matched: m.matched,
                    residual: m.residual,
                },
                cost: self.cost_index_scan(ix, sel)?,
                out_rows: rows * local_sel * key_sel,
            });
        }
        Ok(paths)
    }

    /// Enumerates every plan for `q` over `indexes` (real or hypothetical)
    /// and picks the cheapest. Ties go to fewer index columns, then to the
    /// lexicographically smaller index id.
    pub fn plan(&self, q: &BoundQuery, indexes: &[IndexDescriptor]) -> Result<PlannedQuery> {
        let mut alternatives = match q.join {
            None => self.access_paths(q, 0, indexes, None)?,
            Some((outer_col, inner_col)) => {
                let outers = self.access_paths(q, 0, indexes, None)?;
                let inners = self.access_paths(q, 1, indexes, Some(inner_col.column))?;
                let cross = q.cross_table();
                let cross_sel = self.conjunction_selectivity(q, &cross)?;
                let mut v = Vec::with_capacity(outers.len() * inners.len());
                for o in &outers {
                    for i in &inners {
                        // Inner `out_rows` already carry the join-key selectivity.
                        let join_sel_fix = {
                            let lhs = self.stats(q, outer_col)?;
                            let rhs = self.stats(q, inner_col)?;
                            let inner_key = 1.0 / rhs.ndv.max(1) as f64;
                            column_selectivity(CompareOp::Eq, lhs, rhs) / inner_key
                        };
                        v.push(PlanNode {
                            cost: o.cost + CostEstimate::new(o.out_rows * i.cost.pages),
                            out_rows: o.out_rows * i.out_rows * join_sel_fix * cross_sel,
                            kind: PlanKind::NestedLoopJoin {
                                outer: Box::new(o.clone()),
                                inner: Box::new(i.clone()),
                                outer_col,
                                inner_col,
                                residual: cross.clone(),
                            },
                        });
                    }
                }
                v
            }
        };
        alternatives.sort_by(rank_cmp);
        Ok(PlannedQuery {
            chosen: alternatives[0].clone(),
            alternatives,
        })
    }

    pub fn explain(
        &self,
        q: &BoundQuery,
        indexes: &[IndexDescriptor],
        executed: bool,
    ) -> Result<ExplainReport> {
        let planned = self.plan(q, indexes)?;
        Ok(report(q, planned, executed))
    }
}

pub fn report(q: &BoundQuery, planned: PlannedQuery, executed: bool) -> ExplainReport {
    ExplainReport {
        query: q.sql(),
        scan_object: planned.chosen.scan_object(),
        alternatives: planned
            .alternatives
            .iter()
            .map(|p| (p.summary(), p.cost))
            .collect(),
        chosen_plan: planned.chosen,
        executed,
    }
}
