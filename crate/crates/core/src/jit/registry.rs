use crate::error::Result;
use crate::index::{IndexDescriptor, IndexKind, IndexStore};

/// Snapshot of the real indexes: live JIT indexes in least recently used
/// order, and conventional indexes, which are never evicted.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexRegistry {
    pub live: Vec<IndexDescriptor>,
    pub conventional: Vec<IndexDescriptor>,
}

fn lru_order(a: &IndexDescriptor, b: &IndexDescriptor) -> std::cmp::Ordering {
    (a.last_used, a.created_at, &a.id).cmp(&(b.last_used, b.created_at, &b.id))
}

impl IndexRegistry {
    pub fn from_store(store: &IndexStore) -> Self {
        let (mut live, conventional): (Vec<_>, Vec<_>) = store
            .real_descriptors()
            .into_iter()
            .partition(|d| d.kind == IndexKind::Jit);
        live.sort_by(lru_order);
        IndexRegistry { live, conventional }
    }
}

/// Drops least recently used JIT indexes until at most `capacity` remain.
/// Returns the dropped descriptors in drop order.
pub fn evict_if_needed(store: &mut IndexStore, capacity: usize) -> Result<Vec<IndexDescriptor>> {
    let live = IndexRegistry::from_store(store).live;
    let excess = live.len().saturating_sub(capacity);
    let mut dropped = Vec::with_capacity(excess);
    for d in live.into_iter().take(excess) {
        dropped.push(store.drop_index(&d.id)?);
    }
    Ok(dropped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Catalog, TableSchema};
    use crate::cost::CostModel;
    use crate::index::IndexMode;
    use crate::value::{ColumnType, Row, Value};

    fn setup() -> (Catalog, IndexStore) {
        let mut c = Catalog::new();
        let cols: Vec<(String, ColumnType)> =
            (0..4).map(|i| (format!("C{i}"), ColumnType::Int)).collect();
        c.create_table(TableSchema::new("t", &cols).unwrap())
            .unwrap();
        c.insert_rows("t", (0..10).map(|i| Row(vec![Value::Int(i); 4])).collect())
            .unwrap();
        (c, IndexStore::new())
    }

    fn build(c: &Catalog, s: &mut IndexStore, col: &str, kind: IndexKind) -> IndexDescriptor {
        s.build_index(c, "t", &[col], IndexMode::Real, kind, &CostModel::default())
            .unwrap()
    }

    #[test]
    fn drops_least_recently_used() {
        let (c, mut s) = setup();
        let a = build(&c, &mut s, "c0", IndexKind::Jit);
        let b = build(&c, &mut s, "c1", IndexKind::Jit);
        s.touch(&a.id).unwrap();
        let conv = build(&c, &mut s, "c3", IndexKind::Conventional);
        let new = build(&c, &mut s, "c2", IndexKind::Jit);
        let dropped = evict_if_needed(&mut s, 2).unwrap();
        assert_eq!(
            dropped.iter().map(|d| &d.id).collect::<Vec<_>>(),
            vec![&b.id]
        );
        let reg = IndexRegistry::from_store(&s);
        assert_eq!(
            reg.live.iter().map(|d| &d.id).collect::<Vec<_>>(),
            vec![&a.id, &new.id]
        );
        assert_eq!(reg.conventional.len(), 1);
        assert_eq!(reg.conventional[0].id, conv.id);
        assert!(evict_if_needed(&mut s, 2).unwrap().is_empty());
        let dropped = evict_if_needed(&mut s, 1).unwrap();
        assert_eq!(dropped[0].id, a.id);
        assert!(s.contains(&conv.id));
    }
}
