//! Plan execution and the reference executor used by tests.
//!
//! Page accounting reuses the planner's formulas with the selectivity that
//! was actually observed, so measured and estimated pages are comparable.

use crate::catalog::{Catalog, ColumnData, Table};
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::index::{IndexDescriptor, IndexMode, IndexStore, KeyPredicate};
use crate::planner::{BoundOperand, BoundPredicate, PlanKind, PlanNode, Planner};
use crate::sql::{CompareOp, QueryAst};
use crate::value::{Row, Value};

/// Default cap on materialized result rows.
pub const DEFAULT_MAX_RESULT_ROWS: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
/// Query output, stored column by column.
pub struct ResultSet {
    pub columns: Vec<String>,
    pub data: Vec<ColumnData>,
    pub actual_pages: f64,
    len: usize,
}

impl ResultSet {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, i: usize) -> Row {
        Row(self.data.iter().map(|c| c.get(i)).collect())
    }

    pub fn rows(&self) -> impl Iterator<Item = Row> + '_ {
        (0..self.len).map(|i| self.row(i))
    }

    /// Rows in canonical (sorted) order, for multiset comparison.
    pub fn sorted_rows(&self) -> Vec<Row> {
        let mut rows: Vec<Row> = self.rows().collect();
        rows.sort();
        rows
    }
}

enum Rhs<'a> {
    Lit(Value),
    Col(usize, &'a ColumnData),
}

/// A predicate specialised to the storage of the columns it reads. Row ids
/// are passed per scope position.
struct Check<'a> {
    pos: usize,
    lhs: &'a ColumnData,
    op: CompareOp,
    rhs: Rhs<'a>,
}

impl<'a> Check<'a> {
    fn new(scope: &[&'a Table], p: &BoundPredicate) -> Self {
        let col = |pos: usize, c: usize| scope[pos].data().column(c);
        Check {
            pos: p.lhs.table,
            lhs: col(p.lhs.table, p.lhs.column),
            op: p.op,
            rhs: match &p.rhs {
                BoundOperand::Literal(v) => Rhs::Lit(v.clone()),
                BoundOperand::Column(c) => Rhs::Col(c.table, col(c.table, c.column)),
            },
        }
    }

    fn eval(&self, rows: [usize; 2]) -> bool {
        let r = rows[self.pos];
        match (self.lhs, &self.rhs) {
            (ColumnData::Int(l), Rhs::Lit(Value::Int(v))) => self.op.eval(&l[r], v),
            (ColumnData::Text(l), Rhs::Lit(Value::Text(v))) => self.op.eval::<str>(&l[r], v),
            (ColumnData::Int(l), Rhs::Col(p, ColumnData::Int(x))) => {
                self.op.eval(&l[r], &x[rows[*p]])
            }
            (ColumnData::Text(l), Rhs::Col(p, ColumnData::Text(x))) => {
                self.op.eval::<str>(&l[r], &x[rows[*p]])
            }
            _ => false,
        }
    }
}

fn compile<'a>(scope: &[&'a Table], preds: &[BoundPredicate]) -> Vec<Check<'a>> {
    preds.iter().map(|p| Check::new(scope, p)).collect()
}

fn all(checks: &[Check<'_>], rows: [usize; 2]) -> bool {
    checks.iter().all(|c| c.eval(rows))
}

fn literal(p: &BoundPredicate) -> &Value {
    p.literal().expect("matched predicates are sargable")
}

pub struct Executor<'a> {
    catalog: &'a Catalog,
    store: &'a IndexStore,
    model: &'a CostModel,
    max_rows: usize,
}

impl<'a> Executor<'a> {
    pub fn new(catalog: &'a Catalog, store: &'a IndexStore, model: &'a CostModel) -> Self {
        Executor {
            catalog,
            store,
            model,
            max_rows: DEFAULT_MAX_RESULT_ROWS,
        }
    }

    pub fn with_max_rows(mut self, max_rows: usize) -> Self {
        self.max_rows = max_rows;
        self
    }

    fn table_pages(&self, t: &Table) -> f64 {
        self.model
            .table_pages(t.row_count() as u64, t.schema().row_width_bytes()) as f64
    }

    fn index_pages(&self, ix: &IndexDescriptor, t: &Table, fetched: usize) -> f64 {
        let sel = if t.row_count() == 0 {
            0.0
        } else {
            fetched as f64 / t.row_count() as f64
        };
        ix.stats.height as f64
            + sel * ix.stats.leaf_pages as f64
            + sel * self.table_pages(t) * self.model.fetch_factor
    }

    /// Checks that every index in the plan exists and is real, then stamps
    /// each as used.
    fn audit(&self, plan: &PlanNode) -> Result<Vec<IndexDescriptor>> {
        let mut out = Vec::new();
        for id in plan.indexes() {
            let d = self
                .store
                .get(id)
                .ok_or_else(|| Error::UnknownIndex(id.to_string()))?;
            if d.mode != IndexMode::Real {
                return Err(Error::HypotheticalInPlan(id.to_string()));
            }
            out.push(d);
        }
        for d in &out {
            self.store.touch(&d.id)?;
        }
        Ok(out)
    }

    pub fn execute(&self, plan: &PlanNode) -> Result<ResultSet> {
        self.audit(plan)?;
        match &plan.kind {
            PlanKind::TableScan { .. } | PlanKind::IndexScan { .. } => {
                let t = self.catalog.table(table_of(plan))?;
                let (ids, pages) = self.access(plan, &[t])?;
                if ids.len() > self.max_rows {
                    return Err(Error::ResultTooLarge(self.max_rows));
                }
                Ok(gather(t.schema().column_names(), &[(t, &ids)], pages))
            }
            PlanKind::NestedLoopJoin {
                outer,
                inner,
                outer_col,
                inner_col,
                residual,
            } => {
                let to = self.catalog.table(table_of(outer))?;
                let ti = self.catalog.table(table_of(inner))?;
                let scope = [to, ti];
                let (outer_ids, mut pages) = self.access(outer, &scope)?;
                let cross = compile(&scope, residual);
                let mut pairs: Vec<(u32, u32)> = Vec::new();
                let mut push = |o: u32, i: u32| -> Result<()> {
                    if all(&cross, [o as usize, i as usize]) {
                        if pairs.len() >= self.max_rows {
                            return Err(Error::ResultTooLarge(self.max_rows));
                        }
                        pairs.push((o, i));
                    }
                    Ok(())
                };
                let okey = to.data().column(outer_col.column);
                let ikey = ti.data().column(inner_col.column);
                match &inner.kind {
                    PlanKind::TableScan { filter, .. } => {
                        // Every outer row rescans the inner table; the filtered
                        // inner rows are the same each time, so compute them once.
                        let checks = compile(&scope, filter);
                        let candidates: Vec<u32> = (0..ti.row_count())
                            .filter(|&r| all(&checks, [0, r]))
                            .map(|r| r as u32)
                            .collect();
                        let per_probe = self.table_pages(ti);
                        for &o in &outer_ids {
                            pages += per_probe;
                            for &i in &candidates {
                                if keys_equal(okey, o as usize, ikey, i as usize) {
                                    push(o, i)?;
                                }
                            }
                        }
                    }
                    PlanKind::IndexScan {
                        index,
                        matched,
                        residual,
                        ..
                    } => {
                        let ix = self
                            .store
                            .get(index)
                            .ok_or_else(|| Error::UnknownIndex(index.to_string()))?;
                        let checks = compile(&scope, residual);
                        let exact = matched.len() + 1 == ix.columns.len()
                            && matched.iter().all(|p| p.op == CompareOp::Eq);
                        let mut key: Vec<Value> = Vec::with_capacity(ix.columns.len());
                        // Probing in key order keeps the tree path warm between
                        // neighbouring lookups.
                        let mut outer_ids = outer_ids;
                        match okey {
                            ColumnData::Int(v) => {
                                outer_ids.sort_unstable_by_key(|&o| v[o as usize])
                            }
                            ColumnData::Text(v) => outer_ids
                                .sort_unstable_by(|&a, &b| v[a as usize].cmp(&v[b as usize])),
                        }
                        // With many probes relative to the key count, one ordered
                        // walk of the tree beats repeated descents.
                        let lookup = if exact {
                            Some(self.store.exact_lookup(index)?)
                        } else {
                            None
                        };
                        let mut cursor = lookup
                            .as_ref()
                            .filter(|l| outer_ids.len() * 8 >= l.len())
                            .map(|l| l.cursor());
                        let rest: Vec<Value> = if exact {
                            ix_ordered(&ix, ti, matched).collect()
                        } else {
                            Vec::new()
                        };
                        for &o in &outer_ids {
                            let probe_val = okey.get(o as usize);
                            let fetched: Vec<u32>;
                            let rows: &[u32] = if let Some(lookup) = &lookup {
                                key.clear();
                                key.push(probe_val);
                                key.extend(rest.iter().cloned());
                                match &mut cursor {
                                    Some(c) => c.seek(&key),
                                    None => lookup.get(&key),
                                }
                            } else {
                                let mut kp = vec![KeyPredicate::new(
                                    &ix.columns[0],
                                    CompareOp::Eq,
                                    probe_val,
                                )];
                                kp.extend(matched.iter().map(|p| key_pred(ti, p)));
                                fetched = self.store.probe(index, &kp)?;
                                &fetched
                            };
                            pages += self.index_pages(&ix, ti, rows.len());
                            for &i in rows {
                                if all(&checks, [0, i as usize]) {
                                    push(o, i)?;
                                }
                            }
                        }
                    }
                    PlanKind::NestedLoopJoin { .. } => {
                        return Err(Error::Unsupported("nested joins".into()))
                    }
                }
                let mut columns = qualified(to);
                columns.extend(qualified(ti));
                let (o_ids, i_ids): (Vec<u32>, Vec<u32>) = pairs.into_iter().unzip();
                Ok(gather(columns, &[(to, &o_ids), (ti, &i_ids)], pages))
            }
        }
    }

    /// Row ids produced by a single-table access path, plus pages read.
    fn access(&self, node: &PlanNode, scope: &[&Table]) -> Result<(Vec<u32>, f64)> {
        let t = scope[0];
        match &node.kind {
            PlanKind::TableScan { filter, .. } => {
                let checks = compile(scope, filter);
                let ids = (0..t.row_count())
                    .filter(|&r| all(&checks, [r, 0]))
                    .map(|r| r as u32)
                    .collect();
                Ok((ids, self.table_pages(t)))
            }
            PlanKind::IndexScan {
                index,
                matched,
                residual,
                ..
            } => {
                let ix = self
                    .store
                    .get(index)
                    .ok_or_else(|| Error::UnknownIndex(index.to_string()))?;
                let kp: Vec<KeyPredicate> = matched.iter().map(|p| key_pred(t, p)).collect();
                let probed = self.store.probe(index, &kp)?;
                let pages = self.index_pages(&ix, t, probed.len());
                let checks = compile(scope, residual);
                let mut ids: Vec<u32> = probed
                    .into_iter()
                    .filter(|&r| all(&checks, [r as usize, 0]))
                    .collect();
                ids.sort_unstable();
                Ok((ids, pages))
            }
            PlanKind::NestedLoopJoin { .. } => {
                Err(Error::Unsupported("join as a join input".into()))
            }
        }
    }
}

/// Builds `n` output rows, each the concatenation of row `ids[k]` of every
/// part. Columns are read one at a time, which is much kinder to the cache
/// than walking every column for each row.
fn gather(columns: Vec<String>, parts: &[(&Table, &[u32])], actual_pages: f64) -> ResultSet {
    let len = parts.first().map_or(0, |(_, ids)| ids.len());
    let mut data = Vec::with_capacity(columns.len());
    for (t, ids) in parts {
        for c in 0..t.schema().columns().len() {
            data.push(match t.data().column(c) {
                ColumnData::Int(v) => ColumnData::Int(ids.iter().map(|&r| v[r as usize]).collect()),
                ColumnData::Text(v) => {
                    ColumnData::Text(ids.iter().map(|&r| v[r as usize].clone()).collect())
                }
            });
        }
    }
    ResultSet {
        columns,
        data,
        actual_pages,
        len,
    }
}

fn table_of(node: &PlanNode) -> &str {
    match &node.kind {
        PlanKind::TableScan { table, .. } | PlanKind::IndexScan { table, .. } => table,
        PlanKind::NestedLoopJoin { outer, .. } => table_of(outer),
    }
}

fn key_pred(t: &Table, p: &BoundPredicate) -> KeyPredicate {
    KeyPredicate::new(
        &t.schema().columns()[p.lhs.column].name,
        p.op,
        literal(p).clone(),
    )
}

/// Literal values of `matched` in the order of the index's trailing columns.
fn ix_ordered<'p>(
    ix: &'p IndexDescriptor,
    t: &'p Table,
    matched: &'p [BoundPredicate],
) -> impl Iterator<Item = Value> + 'p {
    ix.columns[1..].iter().map(move |name| {
        let col = t.schema().column_index(name).expect("index column exists");
        let p = matched
            .iter()
            .find(|p| p.lhs.column == col)
            .expect("exact probe covers every key column");
        literal(p).clone()
    })
}

fn keys_equal(a: &ColumnData, i: usize, b: &ColumnData, j: usize) -> bool {
    match (a, b) {
        (ColumnData::Int(x), ColumnData::Int(y)) => x[i] == y[j],
        (ColumnData::Text(x), ColumnData::Text(y)) => x[i] == y[j],
        _ => false,
    }
}

fn qualified(t: &Table) -> Vec<String> {
    t.schema()
        .columns()
        .iter()
        .map(|c| format!("{}.{}", t.name(), c.name))
        .collect()
}

/// Evaluates `q` by brute force, ignoring every index: all rows (or all row
/// pairs) are materialized and filtered with plain value comparisons.
pub fn oracle_execute(catalog: &Catalog, q: &QueryAst) -> Result<ResultSet> {
    let model = CostModel::default();
    let bound = Planner::new(catalog, &model).bind(q)?;
    let tables: Vec<&Table> = bound
        .tables
        .iter()
        .map(|t| catalog.table(t))
        .collect::<Result<_>>()?;
    let value = |pos: usize, rows: &[usize], col: usize| tables[pos].data().value(rows[pos], col);
    let holds = |rows: &[usize]| {
        let join_ok = bound
            .join
            .is_none_or(|(l, r)| value(l.table, rows, l.column) == value(r.table, rows, r.column));
        join_ok
            && bound.predicates.iter().all(|p| {
                let lhs = value(p.lhs.table, rows, p.lhs.column);
                let rhs: Value = match &p.rhs {
                    BoundOperand::Literal(v) => v.clone(),
                    BoundOperand::Column(c) => value(c.table, rows, c.column),
                };
                p.op.eval(&lhs, &rhs)
            })
    };
    let to_u32 = |r: usize| r as u32;
    if tables.len() == 1 {
        let ids: Vec<u32> = (0..tables[0].row_count())
            .filter(|&r| holds(&[r]))
            .map(to_u32)
            .collect();
        return Ok(gather(
            tables[0].schema().column_names(),
            &[(tables[0], &ids)],
            0.0,
        ));
    }
    let columns = qualified(tables[0])
        .into_iter()
        .chain(qualified(tables[1]))
        .collect();
    let (mut a_ids, mut b_ids) = (Vec::new(), Vec::new());
    for a in 0..tables[0].row_count() {
        for b in 0..tables[1].row_count() {
            if holds(&[a, b]) {
                a_ids.push(to_u32(a));
                b_ids.push(to_u32(b));
            }
        }
    }
    Ok(gather(
        columns,
        &[(tables[0], &a_ids), (tables[1], &b_ids)],
        0.0,
    ))
}
