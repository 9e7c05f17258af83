mod common;

use jitdb::{parse, render, CostModel, IndexKind, IndexMode, IndexStore, PlanKind, Planner};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    /// Offering more indexes never makes the chosen plan worse, and the chosen
    /// plan is the cheapest of the alternatives it reports.
    #[test]
    fn chosen_plan_is_minimal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let catalog = common::small_catalog(&mut rng, 3000, 300);
        let model = CostModel::default();
        let mut store = IndexStore::new();
        let mut indexes = Vec::new();
        for _ in 0..3 {
            let (t, cols) = common::random_index(&mut rng);
            if let Ok(ix) = store.build_index(&catalog, t, &cols, IndexMode::Real, IndexKind::Conventional, &model) {
                indexes.push(ix);
            }
        }
        let sql = common::random_query(&mut rng);
        let planner = Planner::new(&catalog, &model);
        let q = planner.bind(&parse(&sql).unwrap()).unwrap();
        let all = planner.plan(&q, &indexes).unwrap();
        for alt in &all.alternatives {
            prop_assert!(all.chosen.cost.pages <= alt.cost.pages);
        }
        let none = planner.plan(&q, &[]).unwrap().chosen.cost.pages;
        prop_assert!(all.chosen.cost.pages <= none);
        for ix in &indexes {
            let single = planner.plan(&q, std::slice::from_ref(ix)).unwrap().chosen.cost.pages;
            prop_assert!(all.chosen.cost.pages <= single + 1e-9, "{}", sql);
        }
    }

    #[test]
    fn selectivity_is_a_fraction(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let catalog = common::small_catalog(&mut rng, 500, 50);
        let model = CostModel::default();
        let planner = Planner::new(&catalog, &model);
        let q = planner.bind(&parse(&common::random_query(&mut rng)).unwrap()).unwrap();
        for p in &q.predicates {
            let s = planner.selectivity(&q, p).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }
        let c = planner.conjunction_selectivity(&q, &q.predicates).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn render_is_a_fixed_point(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sql = common::random_query(&mut rng);
        let once = render(&parse(&sql).unwrap());
        prop_assert_eq!(render(&parse(&once).unwrap()), once);
    }
}

#[test]
fn equality_prefix_then_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let catalog = common::small_catalog(&mut rng, 3000, 10);
    let model = CostModel::default();
    let mut store = IndexStore::new();
    let ix = store
        .build_index(
            &catalog,
            "R",
            &["A", "B", "C"],
            IndexMode::Real,
            IndexKind::Conventional,
            &model,
        )
        .unwrap();
    let planner = Planner::new(&catalog, &model);
    let usable = |sql: &str| -> usize {
        let q = planner.bind(&parse(sql).unwrap()).unwrap();
        let plans = planner.plan(&q, std::slice::from_ref(&ix)).unwrap();
        plans
            .alternatives
            .iter()
            .find_map(|p| match &p.kind {
                PlanKind::IndexScan { matched, .. } => Some(matched.len()),
                _ => None,
            })
            .unwrap_or(0)
    };
    assert_eq!(usable("select * from r where a = 1 and b = 2 and c > 3"), 3);
    assert_eq!(usable("select * from r where a = 1 and b > 2 and c = 3"), 2);
    assert_eq!(usable("select * from r where a < 1 and b = 2"), 1);
    assert_eq!(usable("select * from r where b = 2 and c = 3"), 0);
}
