//! Ordered composite-key indexes.
//!
//! A real index maps lexicographically ordered key tuples to row ids. A
//! hypothetical index carries only [`IndexStats`]; the planner can cost it
//! but it can never be probed. `leaf_pages` and `height` are modeled from
//! [`CostModel`] rather than measured from the in-memory structure, so an
//! estimate and a real build on the same data agree exactly.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Bound;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::catalog::{Catalog, Table};
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::sql::CompareOp;
use crate::value::Value;

/// Bytes per index entry on top of the key columns (the row pointer).
pub const ROW_POINTER_BYTES: u64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexId(String);

impl IndexId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for IndexId {
    fn from(s: &str) -> Self {
        IndexId(s.to_ascii_uppercase())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexMode {
    Real,
    Hypothetical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexKind {
    Conventional,
    Jit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IndexStats {
    pub key_ndv: u64,
    pub leaf_pages: u64,
    pub height: u32,
    pub size_bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexDescriptor {
    pub id: IndexId,
    pub table: String,
    pub columns: Vec<String>,
    pub mode: IndexMode,
    pub kind: IndexKind,
    pub stats: IndexStats,
    pub last_used: u64,
    pub created_at: u64,
}

impl IndexDescriptor {
    pub fn is_real(&self) -> bool {
        self.mode == IndexMode::Real
    }

    /// `TABLE(C1,C2)` for reports.
    pub fn display_name(&self) -> String {
        format!("{}({})", self.table, self.columns.join(","))
    }
}

/// One comparison against a key column, as handed to [`IndexStore::probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct KeyPredicate {
    pub column: String,
    pub op: CompareOp,
    pub value: Value,
}

impl KeyPredicate {
    pub fn new(column: &str, op: CompareOp, value: impl Into<Value>) -> Self {
        KeyPredicate {
            column: column.to_ascii_uppercase(),
            op,
            value: value.into(),
        }
    }
}

fn resolve_columns(table: &Table, columns: &[&str]) -> Result<(Vec<String>, Vec<usize>)> {
    if columns.is_empty() {
        return Err(Error::Config("an index needs at least one column".into()));
    }
    let mut names = Vec::with_capacity(columns.len());
    let mut idx = Vec::with_capacity(columns.len());
    for c in columns {
        let i = table
            .schema()
            .column_index(c)
            .ok_or_else(|| Error::UnknownColumn(c.to_string()))?;
        if idx.contains(&i) {
            return Err(Error::DuplicateColumn {
                table: table.name().to_string(),
                column: c.to_ascii_uppercase(),
            });
        }
        idx.push(i);
        names.push(table.schema().columns()[i].name.clone());
    }
    Ok((names, idx))
}

fn modeled_stats(table: &Table, cols: &[usize], key_ndv: u64, model: &CostModel) -> IndexStats {
    let rows = table.row_count() as u64;
    let key_width: u64 = cols
        .iter()
        .map(|&c| table.schema().columns()[c].ty.width())
        .sum();
    let size_bytes = rows * (key_width + ROW_POINTER_BYTES);
    let leaf_pages = model.pages_for(size_bytes);
    IndexStats {
        key_ndv,
        leaf_pages,
        height: model.index_height(leaf_pages),
        size_bytes,
    }
}

/// Statistics an index on `columns` would have, from the formulas alone.
/// `key_ndv` is the independence estimate `min(rows, Π ndv_i)`.
pub fn estimate_index(
    catalog: &Catalog,
    table: &str,
    columns: &[&str],
    model: &CostModel,
) -> Result<IndexStats> {
    let t = catalog.table(table)?;
    let (_, cols) = resolve_columns(t, columns)?;
    let rows = t.row_count() as u64;
    let product = cols
        .iter()
        .fold(1u64, |acc, &c| acc.saturating_mul(t.stats()[c].ndv));
    Ok(modeled_stats(t, &cols, product.min(rows), model))
}

fn key_of(table: &Table, cols: &[usize], row: usize) -> Box<[Value]> {
    cols.iter().map(|&c| table.data().value(row, c)).collect()
}

#[derive(Debug)]
struct IndexEntry {
    desc: IndexDescriptor,
    last_used: AtomicU64,
    tree: Option<BTreeMap<Box<[Value]>, Vec<u32>>>,
}

/// Every index descriptor the engine knows about, real and hypothetical,
/// plus the logical clock that stamps creation and use.
#[derive(Debug, Default)]
pub struct IndexStore {
    entries: BTreeMap<IndexId, IndexEntry>,
    clock: AtomicU64,
}

impl IndexStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances the logical clock and returns the new time.
    pub fn tick(&self) -> u64 {
        self.clock.fetch_add(1, Ordering::SeqCst) + 1
    }

    pub fn now(&self) -> u64 {
        self.clock.load(Ordering::SeqCst)
    }

    pub fn index_id(table: &str, columns: &[String], mode: IndexMode, kind: IndexKind) -> IndexId {
        let prefix = match (mode, kind) {
            (IndexMode::Hypothetical, _) => "HYP",
            (IndexMode::Real, IndexKind::Jit) => "JIT",
            (IndexMode::Real, IndexKind::Conventional) => "IDX",
        };
        IndexId(format!(
            "{prefix}_{}_{}",
            table.to_ascii_uppercase(),
            columns.join("_")
        ))
    }

    pub fn build_index(
        &mut self,
        catalog: &Catalog,
        table: &str,
        columns: &[&str],
        mode: IndexMode,
        kind: IndexKind,
        model: &CostModel,
    ) -> Result<IndexDescriptor> {
        let t = catalog.table(table)?;
        let (names, cols) = resolve_columns(t, columns)?;
        let duplicate = self
            .entries
            .values()
            .any(|e| e.desc.mode == mode && e.desc.table == t.name() && e.desc.columns == names);
        let id = Self::index_id(t.name(), &names, mode, kind);
        if duplicate || self.entries.contains_key(&id) {
            return Err(Error::DuplicateIndex {
                table: t.name().to_string(),
                columns: names.join(","),
            });
        }

        let (tree, key_ndv) = match mode {
            IndexMode::Real => {
                let mut tree: BTreeMap<Box<[Value]>, Vec<u32>> = BTreeMap::new();
                for row in 0..t.row_count() {
                    tree.entry(key_of(t, &cols, row))
                        .or_default()
                        .push(row as u32);
                }
                let ndv = tree.len() as u64;
                (Some(tree), ndv)
            }
            IndexMode::Hypothetical => {
                let keys: HashSet<Box<[Value]>> = (0..t.row_count())
                    .map(|row| key_of(t, &cols, row))
                    .collect();
                (None, keys.len() as u64)
            }
        };
        let now = self.tick();
        let desc = IndexDescriptor {
            id: id.clone(),
            table: t.name().to_string(),
            columns: names,
            mode,
            kind,
            stats: modeled_stats(t, &cols, key_ndv, model),
            last_used: now,
            created_at: now,
        };
        self.entries.insert(
            id,
            IndexEntry {
                desc: desc.clone(),
                last_used: AtomicU64::new(now),
                tree,
            },
        );
        Ok(desc)
    }

    pub fn drop_index(&mut self, id: &IndexId) -> Result<IndexDescriptor> {
        self.entries
            .remove(id)
            .map(|e| Self::snapshot(&e))
            .ok_or_else(|| Error::UnknownIndex(id.to_string()))
    }

    fn snapshot(e: &IndexEntry) -> IndexDescriptor {
        let mut d = e.desc.clone();
        d.last_used = e.last_used.load(Ordering::SeqCst);
        d
    }

    pub fn get(&self, id: &IndexId) -> Option<IndexDescriptor> {
        self.entries.get(id).map(Self::snapshot)
    }

    pub fn contains(&self, id: &IndexId) -> bool {
        self.entries.contains_key(id)
    }

    /// All descriptors, ordered by id.
    pub fn descriptors(&self) -> Vec<IndexDescriptor> {
        self.entries.values().map(Self::snapshot).collect()
    }

    pub fn real_descriptors(&self) -> Vec<IndexDescriptor> {
        self.entries
            .values()
            .filter(|e| e.desc.mode == IndexMode::Real)
            .map(Self::snapshot)
            .collect()
    }

    pub fn hypothetical_count(&self) -> usize {
        self.entries
            .values()
            .filter(|e| e.desc.mode == IndexMode::Hypothetical)
            .count()
    }

    /// Stamps `id` as used now.
    pub fn touch(&self, id: &IndexId) -> Result<u64> {
        let e = self
            .entries
            .get(id)
            .ok_or_else(|| Error::UnknownIndex(id.to_string()))?;
        let now = self.tick();
        e.last_used.store(now, Ordering::SeqCst);
        Ok(now)
    }

    /// Returns the row ids whose keys satisfy `preds`, in key order. The
    /// predicates must be equalities on a prefix of the key columns,
    /// optionally followed by range comparisons on the next column.
    pub fn probe(&self, id: &IndexId, preds: &[KeyPredicate]) -> Result<Vec<u32>> {
        let e = self
            .entries
            .get(id)
            .ok_or_else(|| Error::UnknownIndex(id.to_string()))?;
        let Some(tree) = &e.tree else {
            return Err(Error::HypotheticalProbe(id.to_string()));
        };
        let bounds = ProbeBounds::new(&e.desc, preds)?;
        let now = self.tick();
        e.last_used.store(now, Ordering::SeqCst);
        Ok(bounds.scan(tree))
    }
}

/// Full-key lookups into one real index, for join probes. Does not stamp
/// `last_used`; callers touch the index once per query.
pub struct ExactLookup<'a> {
    tree: &'a BTreeMap<Box<[Value]>, Vec<u32>>,
    width: usize,
}

impl<'a> ExactLookup<'a> {
    /// Row ids stored under `key`, which must cover every key column.
    pub fn get(&self, key: &[Value]) -> &'a [u32] {
        debug_assert_eq!(key.len(), self.width);
        self.tree.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of distinct keys.
    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// A forward-only cursor for probing with non-decreasing keys.
    pub fn cursor(&self) -> ExactCursor<'a> {
        ExactCursor {
            iter: self.tree.iter().peekable(),
        }
    }
}

pub struct ExactCursor<'a> {
    iter: std::iter::Peekable<std::collections::btree_map::Iter<'a, Box<[Value]>, Vec<u32>>>,
}

impl<'a> ExactCursor<'a> {
    /// Row ids under `key`. Keys passed to successive calls must not decrease.
    pub fn seek(&mut self, key: &[Value]) -> &'a [u32] {
        while let Some((k, rows)) = self.iter.peek() {
            match k[..].cmp(key) {
                std::cmp::Ordering::Less => {
                    self.iter.next();
                }
                std::cmp::Ordering::Equal => return rows.as_slice(),
                std::cmp::Ordering::Greater => break,
            }
        }
        &[]
    }
}

impl IndexStore {
    pub fn exact_lookup(&self, id: &IndexId) -> Result<ExactLookup<'_>> {
        let e = self
            .entries
            .get(id)
            .ok_or_else(|| Error::UnknownIndex(id.to_string()))?;
        let Some(tree) = &e.tree else {
            return Err(Error::HypotheticalProbe(id.to_string()));
        };
        Ok(ExactLookup {
            tree,
            width: e.desc.columns.len(),
        })
    }
}

/// A probe reduced to an equality prefix plus an interval on the next key
/// column.
struct ProbeBounds {
    prefix: Vec<Value>,
    lower: Bound<Value>,
    upper: Bound<Value>,
    empty: bool,
}

impl ProbeBounds {
    fn new(desc: &IndexDescriptor, preds: &[KeyPredicate]) -> Result<Self> {
        let err = || Error::NonPrefixPredicates(desc.id.to_string());
        let mut consumed = vec![false; preds.len()];
        let mut out = ProbeBounds {
            prefix: Vec::new(),
            lower: Bound::Unbounded,
            upper: Bound::Unbounded,
            empty: false,
        };
        for col in &desc.columns {
            let on_col: Vec<usize> = (0..preds.len())
                .filter(|&i| preds[i].column.eq_ignore_ascii_case(col))
                .collect();
            if on_col.is_empty() {
                break;
            }
            let eqs = on_col
                .iter()
                .filter(|&&i| preds[i].op == CompareOp::Eq)
                .count();
            if eqs == 1 && on_col.len() == 1 {
                consumed[on_col[0]] = true;
                out.prefix.push(preds[on_col[0]].value.clone());
                continue;
            }
            if eqs > 0 {
                return Err(err());
            }
            for &i in &on_col {
                consumed[i] = true;
                out.narrow(preds[i].op, &preds[i].value);
            }
            break;
        }
        if consumed.iter().any(|c| !c) {
            return Err(err());
        }
        Ok(out)
    }

    fn narrow(&mut self, op: CompareOp, v: &Value) {
        let tighter_lower = |cur: &Bound<Value>, new: Bound<Value>| -> Bound<Value> {
            match (cur, &new) {
                (Bound::Unbounded, _) => new,
                (
                    Bound::Included(a) | Bound::Excluded(a),
                    Bound::Included(b) | Bound::Excluded(b),
                ) => {
                    if b > a || (b == a && matches!(new, Bound::Excluded(_))) {
                        new
                    } else {
                        cur.clone()
                    }
                }
                (_, Bound::Unbounded) => cur.clone(),
            }
        };
        let tighter_upper = |cur: &Bound<Value>, new: Bound<Value>| -> Bound<Value> {
            match (cur, &new) {
                (Bound::Unbounded, _) => new,
                (
                    Bound::Included(a) | Bound::Excluded(a),
                    Bound::Included(b) | Bound::Excluded(b),
                ) => {
                    if b < a || (b == a && matches!(new, Bound::Excluded(_))) {
                        new
                    } else {
                        cur.clone()
                    }
                }
                (_, Bound::Unbounded) => cur.clone(),
            }
        };
        match op {
            CompareOp::Gt => self.lower = tighter_lower(&self.lower, Bound::Excluded(v.clone())),
            CompareOp::Ge => self.lower = tighter_lower(&self.lower, Bound::Included(v.clone())),
            CompareOp::Lt => self.upper = tighter_upper(&self.upper, Bound::Excluded(v.clone())),
            CompareOp::Le => self.upper = tighter_upper(&self.upper, Bound::Included(v.clone())),
            CompareOp::Eq => unreachable!("equalities form the prefix"),
        }
        if let (Bound::Included(l) | Bound::Excluded(l), Bound::Included(u) | Bound::Excluded(u)) =
            (&self.lower, &self.upper)
        {
            let both_inclusive = matches!(self.lower, Bound::Included(_))
                && matches!(self.upper, Bound::Included(_));
            if l > u || (l == u && !both_inclusive) {
                self.empty = true;
            }
        }
    }

    fn scan(&self, tree: &BTreeMap<Box<[Value]>, Vec<u32>>) -> Vec<u32> {
        if self.empty {
            return Vec::new();
        }
        let k = self.prefix.len();
        let mut start = self.prefix.clone();
        if let Bound::Included(v) | Bound::Excluded(v) = &self.lower {
            start.push(v.clone());
        }
        let mut out = Vec::new();
        for (key, rows) in tree.range::<[Value], _>((Bound::Included(&start[..]), Bound::Unbounded))
        {
            if key[..k] != self.prefix[..] {
                break;
            }
            if key.len() > k {
                let next = &key[k];
                if let Bound::Excluded(l) = &self.lower {
                    if next == l {
                        continue;
                    }
                }
                let within = match &self.upper {
                    Bound::Unbounded => true,
                    Bound::Included(u) => next <= u,
                    Bound::Excluded(u) => next < u,
                };
                if !within {
                    break;
                }
            }
            out.extend_from_slice(rows);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::TableSchema;
    use crate::value::{ColumnType, Row};
    use proptest::prelude::*;

    fn table_with(rows: &[[i64; 3]]) -> Catalog {
        let mut c = Catalog::new();
        c.create_table(
            TableSchema::new(
                "t",
                &[
                    ("a", ColumnType::Int),
                    ("b", ColumnType::Int),
                    ("c", ColumnType::Int),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        c.insert_rows(
            "t",
            rows.iter()
                .map(|r| Row(r.iter().map(|&v| Value::Int(v)).collect()))
                .collect(),
        )
        .unwrap();
        c
    }

    fn scan_oracle(c: &Catalog, preds: &[KeyPredicate]) -> Vec<u32> {
        let t = c.table("t").unwrap();
        (0..t.row_count())
            .filter(|&r| {
                preds.iter().all(|p| {
                    let col = t.schema().column_index(&p.column).unwrap();
                    p.op.eval(&t.data().value(r, col), &p.value)
                })
            })
            .map(|r| r as u32)
            .collect()
    }

    #[test]
    fn estimate_matches_stated_arithmetic() {
        let mut c = Catalog::new();
        c.create_table(
            TableSchema::new("t", &[("m1", ColumnType::Int), ("m2", ColumnType::Int)]).unwrap(),
        )
        .unwrap();
        let rows: Vec<Row> = (0..100_000)
            .map(|i| Row(vec![Value::Int(i % 5), Value::Int((i / 5) % 5)]))
            .collect();
        c.insert_rows("t", rows).unwrap();
        let m = CostModel::default();
        let s = estimate_index(&c, "t", &["m1"], &m).unwrap();
        assert_eq!((s.size_bytes, s.leaf_pages, s.height), (1_600_000, 196, 2));
        assert_eq!(s.key_ndv, 5);
        let s2 = estimate_index(&c, "t", &["m1", "m2"], &m).unwrap();
        assert_eq!(s2.key_ndv, 25);

        let mut store = IndexStore::new();
        let real = store
            .build_index(
                &c,
                "t",
                &["m1"],
                IndexMode::Real,
                IndexKind::Conventional,
                &m,
            )
            .unwrap();
        assert_eq!(real.stats.key_ndv, 5);
        assert_eq!(real.stats.leaf_pages, s.leaf_pages);
        assert_eq!(real.stats.height, s.height);
        let rows = store
            .probe(&real.id, &[KeyPredicate::new("m1", CompareOp::Eq, 1)])
            .unwrap();
        assert_eq!(rows.len(), 20_000);
    }

    #[test]
    fn empty_table_has_minimum_shape() {
        let c = table_with(&[]);
        let m = CostModel::default();
        let s = estimate_index(&c, "t", &["a"], &m).unwrap();
        assert_eq!(
            (s.key_ndv, s.leaf_pages, s.height, s.size_bytes),
            (0, 1, 1, 0)
        );
        let mut store = IndexStore::new();
        let d = store
            .build_index(
                &c,
                "t",
                &["a"],
                IndexMode::Real,
                IndexKind::Conventional,
                &m,
            )
            .unwrap();
        assert_eq!(
            (d.stats.key_ndv, d.stats.leaf_pages, d.stats.height),
            (0, 1, 1)
        );
        assert!(store.probe(&d.id, &[]).unwrap().is_empty());
    }

    #[test]
    fn hypothetical_cannot_be_probed() {
        let c = table_with(&[[1, 2, 3], [1, 3, 3]]);
        let mut store = IndexStore::new();
        let d = store
            .build_index(
                &c,
                "t",
                &["a", "b"],
                IndexMode::Hypothetical,
                IndexKind::Jit,
                &CostModel::default(),
            )
            .unwrap();
        assert_eq!(d.stats.key_ndv, 2);
        assert!(matches!(
            store.probe(&d.id, &[KeyPredicate::new("a", CompareOp::Eq, 1)]),
            Err(Error::HypotheticalProbe(_))
        ));
        assert_eq!(store.hypothetical_count(), 1);
        store.drop_index(&d.id).unwrap();
        assert_eq!(store.hypothetical_count(), 0);
        assert!(matches!(
            store.drop_index(&d.id),
            Err(Error::UnknownIndex(_))
        ));
    }

    #[test]
    fn duplicate_real_index_rejected() {
        let c = table_with(&[[1, 2, 3]]);
        let m = CostModel::default();
        let mut store = IndexStore::new();
        store
            .build_index(
                &c,
                "t",
                &["a"],
                IndexMode::Real,
                IndexKind::Conventional,
                &m,
            )
            .unwrap();
        assert!(matches!(
            store.build_index(&c, "t", &["A"], IndexMode::Real, IndexKind::Jit, &m),
            Err(Error::DuplicateIndex { .. })
        ));
        store
            .build_index(&c, "t", &["a"], IndexMode::Hypothetical, IndexKind::Jit, &m)
            .unwrap();
        assert!(matches!(
            store.build_index(&c, "t", &["zz"], IndexMode::Real, IndexKind::Jit, &m),
            Err(Error::UnknownColumn(_))
        ));
        assert!(matches!(
            store.build_index(&c, "nope", &["a"], IndexMode::Real, IndexKind::Jit, &m),
            Err(Error::UnknownTable(_))
        ));
    }

    #[test]
    fn probe_prefix_rule() {
        let c = table_with(&[[2, 1, 0], [2, 2, 0], [1, 1, 0], [2, 1, 5]]);
        let m = CostModel::default();
        let mut store = IndexStore::new();
        let ab = store
            .build_index(&c, "t", &["a", "b"], IndexMode::Real, IndexKind::Jit, &m)
            .unwrap();
        let hit = store
            .probe(
                &ab.id,
                &[
                    KeyPredicate::new("a", CompareOp::Eq, 2),
                    KeyPredicate::new("b", CompareOp::Eq, 1),
                ],
            )
            .unwrap();
        assert_eq!(hit, vec![0, 3]);
        assert!(matches!(
            store.probe(&ab.id, &[KeyPredicate::new("b", CompareOp::Eq, 1)]),
            Err(Error::NonPrefixPredicates(_))
        ));
        assert!(matches!(
            store.probe(
                &ab.id,
                &[
                    KeyPredicate::new("a", CompareOp::Gt, 0),
                    KeyPredicate::new("b", CompareOp::Eq, 1)
                ]
            ),
            Err(Error::NonPrefixPredicates(_))
        ));
        assert!(matches!(
            store.probe(
                &ab.id,
                &[
                    KeyPredicate::new("a", CompareOp::Eq, 2),
                    KeyPredicate::new("c", CompareOp::Eq, 0)
                ]
            ),
            Err(Error::NonPrefixPredicates(_))
        ));
    }

    #[test]
    fn probe_refreshes_last_used() {
        let c = table_with(&[[1, 1, 1]]);
        let mut store = IndexStore::new();
        let d = store
            .build_index(
                &c,
                "t",
                &["a"],
                IndexMode::Real,
                IndexKind::Jit,
                &CostModel::default(),
            )
            .unwrap();
        assert_eq!(d.last_used, d.created_at);
        store.probe(&d.id, &[]).unwrap();
        let after = store.get(&d.id).unwrap();
        assert!(after.last_used > d.last_used);
    }

    fn op() -> impl Strategy<Value = CompareOp> {
        prop_oneof![
            Just(CompareOp::Eq),
            Just(CompareOp::Lt),
            Just(CompareOp::Le),
            Just(CompareOp::Gt),
            Just(CompareOp::Ge)
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        /// Row ids from a prefix probe equal a filtered full scan, and the
        /// matched keys come out in non-decreasing order.
        #[test]
        fn probe_equals_scan(
            rows in proptest::collection::vec(proptest::array::uniform3(0i64..6), 0..300),
            eq_vals in proptest::collection::vec(0i64..6, 0..3),
            ranges in proptest::collection::vec((op(), -1i64..7), 0..3),
        ) {
            let c = table_with(&rows);
            let mut store = IndexStore::new();
            let d = store
                .build_index(&c, "t", &["a", "b", "c"], IndexMode::Real, IndexKind::Jit, &CostModel::default())
                .unwrap();
            let names = ["A", "B", "C"];
            let mut preds: Vec<KeyPredicate> = eq_vals
                .iter()
                .enumerate()
                .map(|(i, v)| KeyPredicate::new(names[i], CompareOp::Eq, *v))
                .collect();
            if eq_vals.len() < 3 {
                for (op, v) in ranges {
                    let op = if op == CompareOp::Eq { CompareOp::Le } else { op };
                    preds.push(KeyPredicate::new(names[eq_vals.len()], op, v));
                }
            }
            let got = store.probe(&d.id, &preds).unwrap();
            let mut sorted = got.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, scan_oracle(&c, &preds));

            let t = c.table("t").unwrap();
            let keys: Vec<Vec<Value>> = got
                .iter()
                .map(|&r| (0..3).map(|col| t.data().value(r as usize, col)).collect())
                .collect();
            prop_assert!(keys.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
