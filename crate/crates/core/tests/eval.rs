use deskbench::agent::ScriptedAgent;
use deskbench::corruption::{Condition, CorruptionKind, CorruptionParams, CorruptionSpec};
use deskbench::eval::{
    corruption_robustness, emit_report, load_report, run_suite, sweep_variants, BenchmarkSuite, CellRecord, Report,
    ReportFormat, RunRecord, RunStore, StoreError, SweepKind, CSV_HEADER,
};
use deskbench::sim::TaskSuite;

fn run(agent: fn() -> ScriptedAgent, tasks: usize, conditions: Vec<Condition>, seed: u64) -> RunRecord {
    let all = TaskSuite::builtin().tasks;
    let suite = BenchmarkSuite::new(all[..tasks].to_vec(), conditions, 1, seed).unwrap();
    let id = agent().id_string();
    run_suite(&suite, &id, || Ok(agent()), |_| {})
}

trait IdString {
    fn id_string(&self) -> String;
}

impl IdString for ScriptedAgent {
    fn id_string(&self) -> String {
        use deskbench::agent::AgentPolicy;
        self.id()
    }
}

fn kind(k: CorruptionKind) -> Condition {
    Condition::single(CorruptionSpec::default_for(k))
}

#[test]
fn grid_size_and_oracle_clean_rate() {
    let r = run(ScriptedAgent::oracle, 2, vec![Condition::clean(), kind(CorruptionKind::Marks)], 0);
    assert_eq!(r.cells.len(), 4);
    let m = corruption_robustness(&r, "x");
    assert_eq!(m.clean.unwrap().rate, 1.0);
}

#[test]
fn metrics_recompute_from_raw_cells() {
    let r = run(ScriptedAgent::naive, 20, Condition::default_grid(), 3);
    let m = corruption_robustness(&r, "naive");
    let corrupted: Vec<f64> = r.cells.iter().filter(|c| c.kind.is_some()).map(|c| c.reward).collect();
    let avg = corrupted.iter().sum::<f64>() / corrupted.len() as f64;
    assert!((m.corrupted.unwrap().rate - avg).abs() < 1e-12);
    let all = r.cells.iter().map(|c| c.reward).sum::<f64>() / r.cells.len() as f64;
    assert!((m.overall.unwrap().rate - all).abs() < 1e-12);
    let cols: Vec<CorruptionKind> = m.kinds.iter().map(|c| c.kind).collect();
    assert_eq!(cols, CorruptionKind::ALL);
    for c in &m.kinds {
        assert!((0.0..=1.0).contains(&c.rate.rate));
    }
}

#[test]
fn robustness_is_the_mean_over_corrupted_cells() {
    let mut r = run(ScriptedAgent::oracle, 4, vec![kind(CorruptionKind::Marks)], 0);
    for (c, v) in r.cells.iter_mut().zip([1.0, 0.0, 1.0, 1.0]) {
        c.reward = v;
    }
    assert_eq!(corruption_robustness(&r, "").corrupted.unwrap().rate, 0.75);
    for c in &mut r.cells {
        c.reward = 0.0;
    }
    assert_eq!(corruption_robustness(&r, "").corrupted.unwrap().rate, 0.0);
}

#[test]
fn errored_cells_are_excluded_but_counted() {
    let mut r = run(ScriptedAgent::oracle, 2, vec![Condition::clean()], 0);
    r.cells[0].reward = 0.0;
    r.cells[0].error = Some("agent failed to start".into());
    let m = corruption_robustness(&r, "");
    assert_eq!(m.errored, 1);
    assert_eq!(m.clean.unwrap().cells, 1);
    assert_eq!(m.clean.unwrap().rate, 1.0);
}

#[test]
fn adding_conditions_leaves_existing_cells_alone() {
    let small = run(ScriptedAgent::naive, 20, vec![kind(CorruptionKind::PopUps)], 9);
    let big = run(ScriptedAgent::naive, 20, Condition::default_grid(), 9);
    let pick = |r: &RunRecord| -> Vec<CellRecord> {
        r.cells.iter().filter(|c| c.condition == "pop-ups").cloned().collect()
    };
    assert_eq!(pick(&small), pick(&big));
}

#[test]
fn oracle_is_at_least_as_robust_as_naive() {
    let o = corruption_robustness(&run(ScriptedAgent::oracle, 20, Condition::default_grid(), 1), "o");
    let n = corruption_robustness(&run(ScriptedAgent::naive, 20, Condition::default_grid(), 1), "n");
    assert!(o.corrupted.unwrap().rate >= n.corrupted.unwrap().rate);
}

#[test]
fn reports_are_stable_and_round_trip() {
    let r = run(ScriptedAgent::naive, 5, Condition::default_grid(), 2);
    let base = corruption_robustness(&run(ScriptedAgent::oracle, 5, Condition::default_grid(), 2), "oracle");
    let report = Report::new(vec![base.clone(), corruption_robustness(&r, "naive").with_baseline(&base)]);
    for f in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown] {
        assert_eq!(emit_report(&report, f), emit_report(&report.clone(), f));
    }
    let json = emit_report(&report, ReportFormat::Json);
    assert_eq!(emit_report(&load_report(&json).unwrap(), ReportFormat::Json), json);

    let csv = emit_report(&report, ReportFormat::Csv);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("scripted_oracle,oracle,rate,100.00,"));
    assert!(lines[3].starts_with("scripted_naive,naive,delta,+0.00,"));

    let md = emit_report(&report, ReportFormat::Markdown);
    let header = md.lines().next().unwrap();
    assert!(header.contains("| Network Error | Verification | Average |"));
}

#[test]
fn empty_report_is_valid() {
    let empty = Report::new(Vec::new());
    assert_eq!(emit_report(&empty, ReportFormat::Csv), format!("{CSV_HEADER}\n"));
    let json = emit_report(&empty, ReportFormat::Json);
    assert_eq!(load_report(&json).unwrap(), empty);
    assert_eq!(emit_report(&empty, ReportFormat::Markdown).lines().count(), 2);
}

#[test]
fn store_round_trip_tamper_and_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::new(dir.path());
    let r = run(ScriptedAgent::oracle, 2, Condition::default_grid(), 4);
    let path = store.save(&r, false).unwrap();
    assert_eq!(store.load(&r.key()).unwrap(), r);
    assert_eq!(store.keys().unwrap(), vec![r.key()]);
    assert!(matches!(store.save(&r, false), Err(StoreError::Exists(_))));
    store.save(&r, true).unwrap();

    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"reward\": 1.0", "\"reward\": 0.0", 1)).unwrap();
    assert!(matches!(store.load(&r.key()), Err(StoreError::Corrupt { .. })));
    std::fs::write(&path, "{").unwrap();
    assert!(matches!(store.load(&r.key()), Err(StoreError::Corrupt { .. })));
    assert!(matches!(store.load("nope"), Err(StoreError::Missing(_))));
}

#[test]
fn sweep_variants_by_kind() {
    let intensity = sweep_variants(SweepKind::Intensity, &[]);
    let scales: Vec<f64> = intensity
        .iter()
        .flat_map(|v| &v.conditions)
        .flat_map(|c| &c.specs)
        .filter_map(|s| match &s.params {
            CorruptionParams::Resolution(p) => Some(p.scale),
            _ => None,
        })
        .collect();
    assert_eq!(scales, [0.75, 0.5, 0.25]);

    let location = sweep_variants(SweepKind::Location, &[]);
    let steps: Vec<i32> = location
        .iter()
        .filter(|v| v.name.starts_with("events-"))
        .map(|v| v.conditions[0].specs[0].schedule)
        .collect();
    assert_eq!(steps, [3, 6, 12]);
    assert_eq!(location.len(), 5);

    let content = sweep_variants(SweepKind::Content, &[]);
    assert_eq!(content.len(), 3);
    match &content[2].conditions[0].specs[0].params {
        CorruptionParams::PopUps(p) => assert_eq!(p.prefix_string, "A New Gift is Waiting"),
        other => panic!("{other:?}"),
    }
}
