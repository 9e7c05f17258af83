use clap::Parser;
use jitdb::harness::EXAM_QUERIES;
use jitdb::{IndexKind, Path};
use jitdb_cli::{run, Args, Repl, Step, EXIT_CONFIG, EXIT_OK, EXIT_QUERY};
use proptest::prelude::*;

fn args(extra: &[&str]) -> Args {
    let mut v = vec!["jitdb"];
    v.extend_from_slice(extra);
    Args::parse_from(v)
}

fn run_capture(a: &Args, input: &str) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(a, input.as_bytes(), &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn line(repl: &mut Repl, text: &str) -> (anyhow::Result<Step>, String) {
    let mut out = Vec::new();
    let r = repl.execute_line(text, &mut out);
    (r, String::from_utf8(out).unwrap())
}

#[test]
fn explain_is_compile_only() {
    let mut repl = Repl::from_args(&args(&["--rows", "2000"])).unwrap();
    let (r, out) = line(&mut repl, &format!("\\explain {}", EXAM_QUERIES[0]));
    assert_eq!(r.unwrap(), Step::Continue);
    assert!(out.starts_with("QUERY SELECT * FROM PHYSICSMARKS WHERE M1 = 1\nPLAN TABLE_SCAN"));
    assert!(out.ends_with("MODE COMPILE_ONLY\n"));
    assert!(repl.engine().history().is_empty());
}

#[test]
fn indexes_lists_jit_index_after_query() {
    let mut repl = Repl::from_args(&args(&["--rows", "20000", "--threshold", "1"])).unwrap();
    let (r, out) = line(&mut repl, EXAM_QUERIES[0]);
    r.unwrap();
    assert!(out.contains("jit: path=index-created"), "{out}");
    let (_, listing) = line(&mut repl, "\\indexes");
    let rows: Vec<&str> = listing.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "{listing}");
    assert!(rows[0].starts_with("JIT_PHYSICSMARKS_M1"));
    assert!(rows[0].contains(" jit "));
    let last_used = repl.engine().indexes()[0].last_used.to_string();
    assert!(rows[0].split_whitespace().any(|c| c == last_used));
}

#[test]
fn unknown_command_prints_usage_and_changes_nothing() {
    let mut repl = Repl::from_args(&args(&["--rows", "500"])).unwrap();
    line(&mut repl, "select * from physicsmarks where m2 = 3")
        .0
        .unwrap();
    let before = (
        repl.engine().history().len(),
        repl.engine().indexes(),
        repl.engine().config().clone(),
    );
    let (r, out) = line(&mut repl, "\\frobnicate now");
    assert_eq!(r.unwrap(), Step::Continue);
    assert!(out.contains("unknown command `\\frobnicate`"));
    assert!(out.contains("\\gen <rows> <seed>"));
    let after = (
        repl.engine().history().len(),
        repl.engine().indexes(),
        repl.engine().config().clone(),
    );
    assert_eq!(before, after);
}

#[test]
fn jit_switch_and_regenerate() {
    let mut repl = Repl::from_args(&args(&["--rows", "300"])).unwrap();
    line(&mut repl, "\\jit off").0.unwrap();
    assert!(!repl.engine().config().enabled);
    line(&mut repl, "select * from mathsmarks where m5 = 1")
        .0
        .unwrap();
    assert_eq!(repl.engine().history().last().unwrap().path, Path::Disabled);
    assert!(line(&mut repl, "\\jit maybe").0.is_err());
    line(&mut repl, "\\gen 50 9").0.unwrap();
    assert_eq!(
        repl.engine()
            .catalog()
            .table("MATHSMARKS")
            .unwrap()
            .row_count(),
        50
    );
    assert!(line(&mut repl, "\\gen 50").0.is_err());
    assert_eq!(line(&mut repl, "\\q").0.unwrap(), Step::Quit);
}

#[test]
fn repl_continues_after_errors() {
    let (code, out, err) = run_capture(
        &args(&["--rows", "200"]),
        "select * from nowhere\nselect from\n\\stats\n\\q\nselect * from physicsmarks\n",
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(err.lines().count(), 2, "{err}");
    assert!(out.contains("PHYSICSMARKS     M1"));
    assert!(!out.contains("rows)"), "input after \\q must not run");
}

#[test]
fn one_shot_exit_codes() {
    let (code, out, _) = run_capture(
        &args(&[
            "--rows",
            "100",
            "--sql",
            "select * from biologymarks where m1 >= 2",
        ]),
        "",
    );
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("jit: path="));
    let (code, _, err) = run_capture(
        &args(&[
            "--rows",
            "100",
            "--sql",
            "select * from biologymarks where zz = 1",
        ]),
        "",
    );
    assert_eq!(code, EXIT_QUERY);
    assert!(err.contains("unknown column"));
    assert_eq!(err.matches("unknown column").count(), 1, "{err}");
    let (code, _, _) = run_capture(
        &args(&[
            "--rows",
            "100",
            "--capacity",
            "0",
            "--sql",
            "select * from biologymarks",
        ]),
        "",
    );
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = run_capture(&args(&["--config", "/nonexistent/jitdb.conf"]), "");
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn compile_only_flag_skips_execution() {
    let (code, out, _) = run_capture(
        &args(&[
            "--rows",
            "100",
            "--compile-only",
            "--sql",
            "select * from englishmarks where m1 = 0",
        ]),
        "",
    );
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("MODE COMPILE_ONLY"));
    assert!(!out.contains("rows)"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("jit.conf");
    std::fs::write(&path, "# tuned\ncapacity = 3\nthreshold = 5\n").unwrap();
    let a = args(&[
        "--config",
        path.to_str().unwrap(),
        "--threshold",
        "7",
        "--threshold-mode",
        "dynamic",
    ]);
    let cfg = a.jit_config().unwrap();
    assert_eq!(cfg.capacity, 3);
    assert_eq!(cfg.static_threshold, 7);
    assert_eq!(cfg.threshold_mode, jitdb::ThresholdMode::Dynamic);

    let a = args(&[
        "--set",
        "usage_order=ascending",
        "--set",
        "expected_reuse=5",
        "--capacity",
        "2",
    ]);
    let cfg = a.jit_config().unwrap();
    assert_eq!(cfg.usage_order, jitdb::jit::UsageOrder::LeastUsedFirst);
    assert_eq!(cfg.expected_reuse, 5.0);
    assert_eq!(cfg.capacity, 2);
    assert!(args(&["--set", "nonsense"]).jit_config().is_err());
    assert!(args(&["--set", "bogus_key=1"]).jit_config().is_err());
}

#[test]
fn data_dir_persists_and_stats_export() {
    let data = tempfile::tempdir().unwrap();
    let stats = tempfile::tempdir().unwrap();
    let d = data.path().to_str().unwrap();
    let s = stats.path().to_str().unwrap();
    let (code, _, _) = run_capture(
        &args(&["--data-dir", d, "--rows", "120", "--seed", "3"]),
        "\\q\n",
    );
    assert_eq!(code, EXIT_OK);
    let (code, out, _) = run_capture(
        &args(&[
            "--data-dir",
            d,
            "--rows",
            "999",
            "--export-stats",
            s,
            "--sql",
            "select * from physicsmarks",
        ]),
        "",
    );
    assert_eq!(code, EXIT_OK);
    assert!(
        out.contains("(120 rows)"),
        "catalog must be reloaded, not regenerated"
    );
    let history = std::fs::read_to_string(stats.path().join("JIT_HISTORY.csv")).unwrap();
    assert_eq!(history.lines().count(), 2);
    assert!(history.starts_with("SEQ,QUERY,A,B,TRIGGERED,PATH"));
}

#[test]
fn bench_flag_prints_report() {
    let (code, out, _) = run_capture(&args(&["--rows", "400", "--bench"]), "");
    assert_eq!(code, EXIT_OK);
    for q in ["Q1 ", "Q2 ", "Q3 ", "Q4 "] {
        assert!(out.contains(q), "{out}");
    }
    assert!(out.contains("MODE EXECUTED"));
}

const COMMANDS: &[&str] = &[
    "select * from physicsmarks where m1 = 1",
    "select * from physicsmarks where m1 = 1 and m2 = 2",
    "select * from chemistrymarks where m3 > 2",
    "select * from chemistrymarks inner join physicsmarks on chemistrymarks.m1 = physicsmarks.m1 where physicsmarks.m2 = 0",
    "select * from missing",
    "select * from",
    "\\explain select * from mathsmarks where m4 <= 1",
    "\\explain",
    "\\indexes",
    "\\stats",
    "\\gen 60 1",
    "\\gen 0 2",
    "\\gen x y",
    "\\jit on",
    "\\jit off",
    "\\bench",
    "\\unknown",
    "",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn no_command_sequence_poisons_the_engine(seq in proptest::collection::vec(0..COMMANDS.len(), 1..12)) {
        let cfg_args = args(&["--rows", "80", "--threshold", "1", "--norm-unit", "1", "--capacity", "2"]);
        let mut repl = Repl::from_args(&cfg_args).unwrap();
        for &i in &seq {
            let (r, _) = line(&mut repl, COMMANDS[i]);
            if let Ok(step) = r {
                prop_assert_eq!(step, Step::Continue);
            }
            let e = repl.engine();
            prop_assert_eq!(e.hypothetical_count(), 0);
            prop_assert!(e.indexes().iter().filter(|d| d.kind == IndexKind::Jit).count() <= 2);
        }
        for probe in ["\\indexes", "\\stats", "\\explain select * from biologymarks where m1 = 1",
                      "select * from englishmarks where m2 >= 1", "\\jit on", "\\gen 30 5", "\\bench"] {
            let (r, _) = line(&mut repl, probe);
            prop_assert!(r.is_ok(), "{} failed after {:?}: {:?}", probe, seq, r.err());
        }
        prop_assert_eq!(repl.engine().audit_violations(), 0);
    }
}
