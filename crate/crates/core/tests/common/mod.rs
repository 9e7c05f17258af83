#![allow(dead_code)]

use std::sync::Arc;

use jitdb::{Catalog, ColumnData, ColumnType, TableSchema};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const INT_COLS: [&str; 3] = ["A", "B", "C"];
const WORDS: [&str; 4] = ["ab", "cd", "ef", "zz"];

/// Two tables R and S with three int columns of varying spread and one text
/// column.
pub fn small_catalog(rng: &mut ChaCha8Rng, max_r: usize, max_s: usize) -> Catalog {
    let mut c = Catalog::new();
    for (name, rows) in [
        ("R", rng.gen_range(0..=max_r)),
        ("S", rng.gen_range(0..=max_s)),
    ] {
        let cols = [
            ("A", ColumnType::Int),
            ("B", ColumnType::Int),
            ("C", ColumnType::Int),
            ("TS", ColumnType::Text),
        ];
        c.create_table(TableSchema::new(name, &cols).unwrap())
            .unwrap();
        let spans = [
            rng.gen_range(1..12),
            rng.gen_range(1..60),
            rng.gen_range(1..600),
        ];
        let mut data: Vec<ColumnData> = spans
            .iter()
            .map(|&s| ColumnData::Int((0..rows).map(|_| rng.gen_range(0..s)).collect()))
            .collect();
        data.push(ColumnData::Text(
            (0..rows)
                .map(|_| Arc::from(WORDS[rng.gen_range(0..3)]))
                .collect(),
        ));
        c.append_columns(name, data).unwrap();
    }
    c
}

/// A random index column list over R or S.
pub fn random_index(rng: &mut ChaCha8Rng) -> (&'static str, Vec<&'static str>) {
    let table = if rng.gen_bool(0.5) { "R" } else { "S" };
    let mut cols = INT_COLS.to_vec();
    if rng.gen_bool(0.2) {
        cols.push("TS");
    }
    let n = rng.gen_range(1..=cols.len().min(3));
    let mut picked = Vec::new();
    for _ in 0..n {
        let i = rng.gen_range(0..cols.len());
        picked.push(cols.remove(i));
    }
    (table, picked)
}

/// A grammar-valid query over R, or R joined with S.
pub fn random_query(rng: &mut ChaCha8Rng) -> String {
    let lit = |rng: &mut ChaCha8Rng, col: &str| -> String {
        if col == "TS" {
            format!("'{}'", WORDS[rng.gen_range(0..4)])
        } else {
            rng.gen_range(-2..40).to_string()
        }
    };
    let ops = ["=", "<", "<=", ">", ">="];
    let join = rng.gen_bool(0.35);
    let tables: &[&str] = if join { &["R", "S"] } else { &["R"] };
    let mut preds = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let t = tables[rng.gen_range(0..tables.len())];
        let op = ops[rng.gen_range(0..ops.len())];
        match rng.gen_range(0..10) {
            0 => preds.push(format!("{t}.TS {op} {}", lit(rng, "TS"))),
            1 => {
                let t2 = tables[rng.gen_range(0..tables.len())];
                let (a, b) = (INT_COLS[rng.gen_range(0..3)], INT_COLS[rng.gen_range(0..3)]);
                preds.push(format!("{t}.{a} {op} {t2}.{b}"));
            }
            _ => {
                let c = INT_COLS[rng.gen_range(0..3)];
                preds.push(format!("{t}.{c} {op} {}", lit(rng, c)));
            }
        }
    }
    let mut sql = String::from("select * from r");
    if join {
        let (a, b) = (INT_COLS[rng.gen_range(0..3)], INT_COLS[rng.gen_range(0..3)]);
        sql.push_str(&format!(" inner join s on r.{a} = s.{b}"));
    }
    if !preds.is_empty() {
        sql.push_str(" where ");
        sql.push_str(&preds.join(" and "));
    }
    sql
}
