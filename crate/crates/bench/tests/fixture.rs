use jitdb::harness::{EXAM_QUERIES, SUBJECT_TABLES};
use jitdb::Path;
use jitdb_bench::exam_engine;

#[test]
fn fixture_engine_is_ready_for_the_exam_queries() {
    let mut e = exam_engine(2_000, 42);
    for t in SUBJECT_TABLES {
        assert_eq!(e.catalog().table(t).unwrap().row_count(), 2_000);
    }
    let out = e.process_query(EXAM_QUERIES[0]).unwrap();
    assert_eq!(out.path, Path::BelowThreshold);
    assert_eq!(
        out.result.unwrap().len(),
        e.run_plain(EXAM_QUERIES[0]).unwrap().len()
    );
}
