mod common;

use jitdb::harness::{generate_dataset, DatasetSpec};
use jitdb::{
    oracle_execute, parse, CostModel, Engine, Executor, IndexKind, IndexMode, IndexStore,
    JitConfig, PlanKind, Planner,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn planned_execution_matches_brute_force(seed in any::<u64>(), n_indexes in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let catalog = common::small_catalog(&mut rng, 400, 80);
        let model = CostModel::default();
        let mut store = IndexStore::new();
        let mut indexes = Vec::new();
        for _ in 0..n_indexes {
            let (t, cols) = common::random_index(&mut rng);
            if let Ok(ix) = store.build_index(&catalog, t, &cols, IndexMode::Real, IndexKind::Conventional, &model) {
                indexes.push(ix);
            }
        }
        let sql = common::random_query(&mut rng);
        let ast = parse(&sql).unwrap();
        let planner = Planner::new(&catalog, &model);
        let q = planner.bind(&ast).unwrap();
        let plan = planner.plan(&q, &indexes).unwrap().chosen;
        let got = Executor::new(&catalog, &store, &model).execute(&plan).unwrap();
        let want = oracle_execute(&catalog, &ast).unwrap();
        prop_assert_eq!(&got.columns, &want.columns);
        prop_assert_eq!(got.sorted_rows(), want.sorted_rows(), "{}", sql);
    }
}

#[test]
fn table_scan_pages_equal_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let catalog = common::small_catalog(&mut rng, 5000, 10);
    let model = CostModel::default();
    let store = IndexStore::new();
    let planner = Planner::new(&catalog, &model);
    let q = planner
        .bind(&parse("select * from r where a < 5").unwrap())
        .unwrap();
    let plan = planner.plan(&q, &[]).unwrap().chosen;
    assert!(matches!(plan.kind, PlanKind::TableScan { .. }));
    let rs = Executor::new(&catalog, &store, &model)
        .execute(&plan)
        .unwrap();
    assert_eq!(rs.actual_pages, planner.cost_table_scan("R").unwrap().pages);
}

#[test]
fn index_scan_pages_within_twice_model() {
    let mut e = Engine::new(JitConfig::default()).unwrap();
    generate_dataset(&mut e, &DatasetSpec::with_rows(20_000, 9), false).unwrap();
    e.create_index("PHYSICSMARKS", &["M1"]).unwrap();
    e.create_index("PHYSICSMARKS", &["M2", "M3"]).unwrap();
    let model = e.cost_model();
    let mut store = IndexStore::new();
    let ixs: Vec<_> = [vec!["M1"], vec!["M2", "M3"]]
        .iter()
        .map(|c| {
            store
                .build_index(
                    e.catalog(),
                    "PHYSICSMARKS",
                    c,
                    IndexMode::Real,
                    IndexKind::Conventional,
                    &model,
                )
                .unwrap()
        })
        .collect();
    let planner = Planner::new(e.catalog(), &model);
    for sql in [
        "select * from physicsmarks where m1 = 2",
        "select * from physicsmarks where m1 = 0",
        "select * from physicsmarks where m2 = 4 and m3 = 1",
        "select * from physicsmarks where m2 = 3 and m3 >= 3",
        "select * from physicsmarks where m2 = 1",
    ] {
        let q = planner.bind(&parse(sql).unwrap()).unwrap();
        let plan = planner.plan(&q, &ixs).unwrap().chosen;
        assert!(
            matches!(plan.kind, PlanKind::IndexScan { .. }),
            "{sql}: {}",
            plan.summary()
        );
        let rs = Executor::new(e.catalog(), &store, &model)
            .execute(&plan)
            .unwrap();
        assert!(
            rs.actual_pages <= 2.0 * plan.cost.pages,
            "{sql}: actual {} model {}",
            rs.actual_pages,
            plan.cost.pages
        );
        assert_eq!(
            rs.sorted_rows(),
            oracle_execute(e.catalog(), &parse(sql).unwrap())
                .unwrap()
                .sorted_rows()
        );
    }
}

#[test]
fn result_cap_is_enforced() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let catalog = common::small_catalog(&mut rng, 400, 80);
    let model = CostModel::default();
    let store = IndexStore::new();
    let planner = Planner::new(&catalog, &model);
    let q = planner
        .bind(&parse("select * from r inner join s on r.a = s.a").unwrap())
        .unwrap();
    let plan = planner.plan(&q, &[]).unwrap().chosen;
    let full = Executor::new(&catalog, &store, &model)
        .execute(&plan)
        .unwrap();
    if full.len() > 1 {
        let capped = Executor::new(&catalog, &store, &model)
            .with_max_rows(full.len() - 1)
            .execute(&plan);
        assert!(matches!(capped, Err(jitdb::Error::ResultTooLarge(_))));
    }
}

#[test]
fn join_at_thousand_rows_matches_nested_loop() {
    let mut e = Engine::new(JitConfig::default()).unwrap();
    let spec = DatasetSpec {
        tables: vec!["CHEMISTRYMARKS".into(), "PHYSICSMARKS".into()],
        rows_per_table: 1000,
        marks_range: (0, 99),
        seed: 5,
    };
    generate_dataset(&mut e, &spec, false).unwrap();
    let sql = jitdb::harness::EXAM_QUERIES[3];
    let oracle = oracle_execute(e.catalog(), &parse(sql).unwrap()).unwrap();
    let out = e.process_query(sql).unwrap();
    let got = out.result.unwrap();
    assert_eq!(got.len(), oracle.len());
    assert_eq!(got.sorted_rows(), oracle.sorted_rows());
}
