use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use jitdb::harness::EXAM_QUERIES;
use jitdb::{parse, Engine, JitConfig, Planner, RunMode};
use jitdb_bench::exam_engine;

const ROWS: usize = 20_000;

fn parse_and_plan(c: &mut Criterion) {
    let engine = exam_engine(ROWS, 42);
    let model = engine.cost_model();
    c.bench_function("parse_plan_q2", |b| {
        b.iter(|| {
            let ast = parse(black_box(EXAM_QUERIES[1])).unwrap();
            let planner = Planner::new(engine.catalog(), &model);
            let q = planner.bind(&ast).unwrap();
            planner.plan(&q, &[]).unwrap()
        })
    });
}

fn scans(c: &mut Criterion) {
    let plain = exam_engine(ROWS, 42);
    let mut indexed = exam_engine(ROWS, 42);
    indexed.create_index("PHYSICSMARKS", &["M1"]).unwrap();
    let mut group = c.benchmark_group("q1_execute");
    group.bench_function("table_scan", |b| {
        b.iter(|| plain.run_plain(EXAM_QUERIES[0]).unwrap())
    });
    group.bench_function("index_scan", |b| {
        b.iter(|| indexed.run_plain(EXAM_QUERIES[0]).unwrap())
    });
    group.finish();
}

fn jit_cycle(c: &mut Criterion) {
    let base = exam_engine(ROWS, 42);
    let cfg = JitConfig {
        static_threshold: 1,
        ..JitConfig::default()
    };
    let mut group = c.benchmark_group("jit_q1");
    group.sample_size(20);
    group.bench_function("cold", |b| {
        b.iter_batched(
            || Engine::with_catalog(base.catalog().clone(), cfg.clone()).unwrap(),
            |mut e| e.process_query(EXAM_QUERIES[0]).unwrap(),
            BatchSize::LargeInput,
        )
    });
    let mut warm = Engine::with_catalog(base.catalog().clone(), cfg.clone()).unwrap();
    warm.process_query(EXAM_QUERIES[0]).unwrap();
    group.bench_function("warm", |b| {
        b.iter(|| warm.process_query(EXAM_QUERIES[0]).unwrap())
    });
    group.bench_function("advise_q2", |b| {
        b.iter(|| warm.advise(EXAM_QUERIES[1]).unwrap())
    });
    group.finish();
}

fn join(c: &mut Criterion) {
    let mut e = Engine::new(JitConfig::default()).unwrap();
    let spec = jitdb::harness::DatasetSpec {
        tables: vec!["CHEMISTRYMARKS".into(), "PHYSICSMARKS".into()],
        rows_per_table: 5_000,
        marks_range: (0, 49_999),
        seed: 42,
    };
    jitdb::harness::generate_dataset(&mut e, &spec, false).unwrap();
    e.process_query(EXAM_QUERIES[3]).unwrap();
    let mut group = c.benchmark_group("q4_join");
    group.sample_size(20);
    group.bench_function("indexed_nlj", |b| {
        b.iter(|| e.process_query(EXAM_QUERIES[3]).unwrap())
    });
    group.bench_function("compile_only", |b| {
        b.iter(|| {
            e.process_query_mode(EXAM_QUERIES[3], RunMode::CompileOnly)
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, parse_and_plan, scans, jit_cycle, join);
criterion_main!(benches);
