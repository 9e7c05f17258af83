//! Table schemas, columnar row storage, per-column statistics and the
//! on-disk catalog format.
//!
//! Statistics are exact: `ndv`, `min` and `max` are recomputed with a full
//! pass whenever rows are bulk loaded. `usage_count` only ever grows; it is
//! bumped once per query for every column that appears in a WHERE or JOIN
//! predicate.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sql::{ColumnRef, QueryAst};
use crate::value::{ColumnType, Row, Value};

const MANIFEST: &str = "manifest.txt";
const STATS_FILE: &str = "stats.csv";
const MANIFEST_MAGIC: &str = "JITDB-CATALOG 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDef {
    pub name: String,
    pub ty: ColumnType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSchema {
    name: String,
    columns: Vec<ColumnDef>,
    row_width_bytes: u64,
}

impl TableSchema {
    /// Builds a schema; identifiers are normalised to upper case.
    pub fn new<N: AsRef<str>>(name: &str, columns: &[(N, ColumnType)]) -> Result<Self> {
        let name = name.to_ascii_uppercase();
        if columns.is_empty() {
            return Err(Error::EmptySchema(name));
        }
        let mut seen = HashSet::new();
        let mut defs = Vec::with_capacity(columns.len());
        for (col, ty) in columns {
            let col = col.as_ref().to_ascii_uppercase();
            if !seen.insert(col.clone()) {
                return Err(Error::DuplicateColumn {
                    table: name,
                    column: col,
                });
            }
            defs.push(ColumnDef { name: col, ty: *ty });
        }
        let row_width_bytes = defs.iter().map(|c| c.ty.width()).sum();
        Ok(TableSchema {
            name,
            columns: defs,
            row_width_bytes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[ColumnDef] {
        &self.columns
    }

    pub fn row_width_bytes(&self) -> u64 {
        self.row_width_bytes
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.name.eq_ignore_ascii_case(name))
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColumnStats {
    pub ndv: u64,
    pub min_val: Option<i64>,
    pub max_val: Option<i64>,
    pub usage_count: u64,
}

/// One column's values.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Int(Vec<i64>),
    Text(Vec<Arc<str>>),
}

impl ColumnData {
    pub fn empty(ty: ColumnType) -> Self {
        match ty {
            ColumnType::Int => ColumnData::Int(Vec::new()),
            ColumnType::Text => ColumnData::Text(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_type(&self) -> ColumnType {
        match self {
            ColumnData::Int(_) => ColumnType::Int,
            ColumnData::Text(_) => ColumnType::Text,
        }
    }

    pub fn get(&self, row: usize) -> Value {
        match self {
            ColumnData::Int(v) => Value::Int(v[row]),
            ColumnData::Text(v) => Value::Text(Arc::clone(&v[row])),
        }
    }

    fn push(&mut self, value: Value) {
        match (self, value) {
            (ColumnData::Int(v), Value::Int(x)) => v.push(x),
            (ColumnData::Text(v), Value::Text(s)) => v.push(s),
            _ => unreachable!("value type checked before push"),
        }
    }

    fn extend(&mut self, other: ColumnData) {
        match (self, other) {
            (ColumnData::Int(a), ColumnData::Int(b)) => a.extend(b),
            (ColumnData::Text(a), ColumnData::Text(b)) => a.extend(b),
            _ => unreachable!("column types checked before extend"),
        }
    }

    fn compute_stats(&self, usage_count: u64) -> ColumnStats {
        match self {
            ColumnData::Int(v) => {
                let mut sorted = v.clone();
                sorted.sort_unstable();
                sorted.dedup();
                ColumnStats {
                    ndv: sorted.len() as u64,
                    min_val: sorted.first().copied(),
                    max_val: sorted.last().copied(),
                    usage_count,
                }
            }
            ColumnData::Text(v) => {
                let distinct: HashSet<&str> = v.iter().map(|s| &**s).collect();
                ColumnStats {
                    ndv: distinct.len() as u64,
                    min_val: None,
                    max_val: None,
                    usage_count,
                }
            }
        }
    }
}

/// Columnar storage for one table. Row ids are positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableData {
    columns: Vec<ColumnData>,
    rows: usize,
}

impl TableData {
    fn new(schema: &TableSchema) -> Self {
        TableData {
            columns: schema
                .columns
                .iter()
                .map(|c| ColumnData::empty(c.ty))
                .collect(),
            rows: 0,
        }
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn column(&self, idx: usize) -> &ColumnData {
        &self.columns[idx]
    }

    pub fn value(&self, row: usize, col: usize) -> Value {
        self.columns[col].get(row)
    }

    pub fn row(&self, row: usize) -> Row {
        Row(self.columns.iter().map(|c| c.get(row)).collect())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    schema: Arc<TableSchema>,
    data: Arc<TableData>,
    stats: Vec<ColumnStats>,
}

impl Table {
    pub fn name(&self) -> &str {
        self.schema.name()
    }

    pub fn schema(&self) -> &TableSchema {
        &self.schema
    }

    pub fn data(&self) -> &TableData {
        &self.data
    }

    pub fn row_count(&self) -> usize {
        self.data.rows
    }

    pub fn stats(&self) -> &[ColumnStats] {
        &self.stats
    }

    fn recompute_stats(&mut self) {
        self.stats = self
            .data
            .columns
            .iter()
            .zip(&self.stats)
            .map(|(col, old)| col.compute_stats(old.usage_count))
            .collect();
    }
}

/// Position of a column inside a (possibly two-table) query scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundColumn {
    pub table: usize,
    pub column: usize,
}

/// The set of tables and their contents. Cloning is cheap: row storage is
/// shared and only statistics are copied.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    tables: BTreeMap<String, Table>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_table(&mut self, schema: TableSchema) -> Result<&Table> {
        let name = schema.name().to_string();
        if self.tables.contains_key(&name) {
            return Err(Error::DuplicateTable(name));
        }
        let stats = vec![ColumnStats::default(); schema.columns().len()];
        let data = TableData::new(&schema);
        let table = Table {
            schema: Arc::new(schema),
            data: Arc::new(data),
            stats,
        };
        Ok(self.tables.entry(name).or_insert(table))
    }

    pub fn drop_table(&mut self, name: &str) -> Result<()> {
        self.tables
            .remove(&name.to_ascii_uppercase())
            .map(|_| ())
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    pub fn table(&self, name: &str) -> Result<&Table> {
        self.tables
            .get(&name.to_ascii_uppercase())
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    fn table_mut(&mut self, name: &str) -> Result<&mut Table> {
        self.tables
            .get_mut(&name.to_ascii_uppercase())
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    pub fn tables(&self) -> impl Iterator<Item = &Table> {
        self.tables.values()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn column_stats(&self, table: &str, column: &str) -> Result<ColumnStats> {
        let t = self.table(table)?;
        let idx = t
            .schema
            .column_index(column)
            .ok_or_else(|| Error::UnknownColumn(column.to_string()))?;
        Ok(t.stats[idx].clone())
    }

    /// Appends whole columns to a table and recomputes its statistics.
    pub fn append_columns(&mut self, table: &str, columns: Vec<ColumnData>) -> Result<usize> {
        let t = self.table_mut(table)?;
        if columns.len() != t.schema.columns().len() {
            return Err(Error::TypeMismatch(format!(
                "{} expects {} columns, got {}",
                t.name(),
                t.schema.columns().len(),
                columns.len()
            )));
        }
        let added = columns.first().map_or(0, ColumnData::len);
        for (col, def) in columns.iter().zip(t.schema.columns()) {
            if col.column_type() != def.ty || col.len() != added {
                return Err(Error::TypeMismatch(format!(
                    "column {} expects {} values of type {}",
                    def.name,
                    added,
                    def.ty.name()
                )));
            }
        }
        if added == 0 {
            return Ok(0);
        }
        let data = Arc::make_mut(&mut t.data);
        for (dst, src) in data.columns.iter_mut().zip(columns) {
            dst.extend(src);
        }
        data.rows += added;
        t.recompute_stats();
        Ok(added)
    }

    /// Row-oriented convenience over [`Catalog::append_columns`].
    pub fn insert_rows(&mut self, table: &str, rows: Vec<Row>) -> Result<usize> {
        let schema = self.table(table)?.schema.clone();
        let mut cols: Vec<ColumnData> = schema
            .columns()
            .iter()
            .map(|c| ColumnData::empty(c.ty))
            .collect();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols.len() {
                return Err(Error::TypeMismatch(format!(
                    "row {i} has {} values, {} expects {}",
                    row.len(),
                    schema.name(),
                    cols.len()
                )));
            }
            for ((col, def), v) in cols.iter_mut().zip(schema.columns()).zip(row.0) {
                if v.column_type() != def.ty {
                    return Err(Error::TypeMismatch(format!(
                        "row {i}: `{v}` is not a valid {} for column {}",
                        def.ty.name(),
                        def.name
                    )));
                }
                col.push(v);
            }
        }
        self.append_columns(table, cols)
    }

    /// Loads a headered CSV into an existing table. The header must list the
    /// schema's columns in order. Rows are appended atomically: on error the
    /// table is unchanged.
    pub fn load_csv(&mut self, path: impl AsRef<Path>, table: &str) -> Result<usize> {
        let path = path.as_ref();
        let schema = self.table(table)?.schema.clone();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(file);
        let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        let expected = schema.column_names();
        let matches = header.len() == expected.len()
            && header
                .iter()
                .zip(&expected)
                .all(|(h, e)| h.trim().eq_ignore_ascii_case(e));
        if !matches {
            return Err(Error::HeaderMismatch {
                path: path.to_path_buf(),
                expected: expected.join(","),
                found: header.iter().collect::<Vec<_>>().join(","),
            });
        }
        let mut cols: Vec<ColumnData> = schema
            .columns()
            .iter()
            .map(|c| ColumnData::empty(c.ty))
            .collect();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::csv(path, e))?;
            for ((col, def), field) in cols.iter_mut().zip(schema.columns()).zip(record.iter()) {
                let v = Value::parse_as(field, def.ty).ok_or_else(|| Error::ValueType {
                    path: path.to_path_buf(),
                    row: row + 1,
                    column: def.name.clone(),
                    value: field.to_string(),
                })?;
                col.push(v);
            }
        }
        self.append_columns(table, cols)
    }

    /// Writes a table as a headered CSV.
    pub fn write_csv(&self, table: &str, path: impl AsRef<Path>) -> Result<usize> {
        let path = path.as_ref();
        let t = self.table(table)?;
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(t.schema.column_names())
            .map_err(|e| Error::csv(path, e))?;
        let mut fields = Vec::with_capacity(t.schema.columns().len());
        for r in 0..t.row_count() {
            fields.clear();
            fields.extend(t.data.columns.iter().map(|c| c.get(r).to_string()));
            w.write_record(&fields).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(t.row_count())
    }

    /// Resolves a column reference against the tables of a query scope
    /// (base table first, then the join table).
    pub fn resolve(&self, scope: &[&str], col: &ColumnRef) -> Result<BoundColumn> {
        if let Some(q) = &col.table {
            let pos = scope
                .iter()
                .position(|t| t.eq_ignore_ascii_case(q))
                .ok_or_else(|| Error::UnknownTable(q.clone()))?;
            let idx = self
                .table(scope[pos])?
                .schema
                .column_index(&col.column)
                .ok_or_else(|| Error::UnknownColumn(col.to_string()))?;
            return Ok(BoundColumn {
                table: pos,
                column: idx,
            });
        }
        let mut found = None;
        for (pos, name) in scope.iter().enumerate() {
            if let Some(idx) = self.table(name)?.schema.column_index(&col.column) {
                if found.is_some() {
                    return Err(Error::AmbiguousColumn(col.to_string()));
                }
                found = Some(BoundColumn {
                    table: pos,
                    column: idx,
                });
            }
        }
        found.ok_or_else(|| Error::UnknownColumn(col.to_string()))
    }

    /// Bumps `usage_count` once for every distinct column that appears in a
    /// WHERE or JOIN predicate of `q`. Nothing is recorded if any reference
    /// fails to resolve.
    pub fn record_column_usage(&mut self, q: &QueryAst) -> Result<()> {
        let scope = q.tables();
        let scope: Vec<&str> = scope.iter().map(String::as_str).collect();
        for t in &scope {
            self.table(t)?;
        }
        let mut used = BTreeSet::new();
        for c in q.predicate_columns() {
            used.insert(self.resolve(&scope, c)?);
        }
        for b in used {
            let name = scope[b.table].to_string();
            self.table_mut(&name)?.stats[b.column].usage_count += 1;
        }
        Ok(())
    }

    /// Saves the catalog as a directory: a text manifest with the schemas,
    /// one CSV per table and one CSV of column statistics.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = String::from(MANIFEST_MAGIC);
        manifest.push('\n');
        for t in self.tables.values() {
            manifest.push_str(&format!("TABLE {}\n", t.name()));
            for c in t.schema.columns() {
                manifest.push_str(&format!("COLUMN {} {}\n", c.name, c.ty.name()));
            }
            manifest.push_str("END\n");
            self.write_csv(t.name(), dir.join(format!("{}.csv", t.name())))?;
        }
        let mpath = dir.join(MANIFEST);
        fs::write(&mpath, manifest).map_err(|e| Error::io(&mpath, e))?;

        let spath = dir.join(STATS_FILE);
        let mut w = csv::Writer::from_path(&spath).map_err(|e| Error::csv(&spath, e))?;
        w.write_record(["TABLE", "COLUMN", "NDV", "MIN", "MAX", "USAGE"])
            .map_err(|e| Error::csv(&spath, e))?;
        let opt = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        for t in self.tables.values() {
            for (c, s) in t.schema.columns().iter().zip(&t.stats) {
                w.write_record([
                    t.name().to_string(),
                    c.name.clone(),
                    s.ndv.to_string(),
                    opt(s.min_val),
                    opt(s.max_val),
                    s.usage_count.to_string(),
                ])
                .map_err(|e| Error::csv(&spath, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(&spath, e))?;
        Ok(())
    }

    pub fn exists_at(dir: impl AsRef<Path>) -> bool {
        dir.as_ref().join(MANIFEST).is_file()
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mpath = dir.join(MANIFEST);
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let mut lines = text.lines();
        if lines.next() != Some(MANIFEST_MAGIC) {
            return Err(Error::Corrupt(format!(
                "{} has no catalog header",
                mpath.display()
            )));
        }
        let mut catalog = Catalog::new();
        let mut current: Option<(String, Vec<(String, ColumnType)>)> = None;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match (parts.as_slice(), current.as_mut()) {
                (["TABLE", name], None) => current = Some((name.to_string(), Vec::new())),
                (["COLUMN", name, ty], Some((_, cols))) => {
                    let ty = ColumnType::parse(ty)
                        .ok_or_else(|| Error::Corrupt(format!("bad column type `{ty}`")))?;
                    cols.push((name.to_string(), ty));
                }
                (["END"], Some(_)) => {
                    let (name, cols) = current.take().expect("matched Some");
                    catalog.create_table(TableSchema::new(&name, &cols)?)?;
                    catalog.load_csv(dir.join(format!("{name}.csv")), &name)?;
                }
                _ => return Err(Error::Corrupt(format!("unexpected manifest line `{line}`"))),
            }
        }
        if current.is_some() {
            return Err(Error::Corrupt("manifest ends inside a table".into()));
        }

        let spath = dir.join(STATS_FILE);
        let mut r = csv::Reader::from_path(&spath).map_err(|e| Error::csv(&spath, e))?;
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::csv(&spath, e))?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let num = |i: usize| -> Result<u64> {
                field(i)
                    .parse()
                    .map_err(|_| Error::Corrupt(format!("bad stats field `{}`", field(i))))
            };
            let opt = |i: usize| -> Result<Option<i64>> {
                match field(i) {
                    "" => Ok(None),
                    s => s
                        .parse()
                        .map(Some)
                        .map_err(|_| Error::Corrupt(format!("bad stats field `{s}`"))),
                }
            };
            let table = catalog.table_mut(field(0))?;
            let idx = table
                .schema
                .column_index(field(1))
                .ok_or_else(|| Error::UnknownColumn(field(1).to_string()))?;
            table.stats[idx] = ColumnStats {
                ndv: num(2)?,
                min_val: opt(3)?,
                max_val: opt(4)?,
                usage_count: num(5)?,
            };
        }
        Ok(catalog)
    }
}
