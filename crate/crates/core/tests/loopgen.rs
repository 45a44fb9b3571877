use std::path::{Path, PathBuf};

use fclcas::adsl::{parse_adsl, ArchitectureSpec};
use fclcas::exec::Exec;
use fclcas::fcdsl::parse_constraints;
use fclcas::fcl::Constraint;
use fclcas::loopgen::{
    format_feedback, generate_prompt, histogram, read_table, render_histogram, requirements_block, run_experiment,
    run_loop, write_table, AbortReason, Backend, Bucket, FeedbackMode, LoopConfig, LoopContext, MockBackend, Role,
    Variant, CLOSER, EXACTLY_ONE, SECTION_BREAK,
};
use fclcas::runtime::{GenericRule, RunReport, StopReason, ViolationReport};
use fclcas::scenarios::{Metrics, ScenarioKind};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn asset(rel: &str) -> String {
    std::fs::read_to_string(root().join(rel)).unwrap()
}

struct Dragon {
    spec: ArchitectureSpec,
    constraints: Vec<Constraint>,
    domain: String,
}

impl Dragon {
    fn load() -> Self {
        Dragon {
            spec: parse_adsl(&asset("specs/dragon.adsl")).unwrap(),
            constraints: parse_constraints(&asset("constraints/dragon.fcl")).unwrap().constraints,
            domain: asset("specs/dragon_domain.txt"),
        }
    }

    fn ctx(&self) -> LoopContext<'_> {
        LoopContext {
            scenario: ScenarioKind::Dragon,
            spec: &self.spec,
            constraints: &self.constraints,
            domain: &self.domain,
            states: &self.spec.initial_states,
        }
    }
}

fn mock(fixture: &str) -> MockBackend {
    MockBackend::from_dir(&root().join("fixtures").join(fixture)).unwrap()
}

fn check_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden file {name} differs");
}

#[test]
fn dragon_prompt_matches_golden_and_structure() {
    let d = Dragon::load();
    let p = generate_prompt(&d.spec, &d.domain, &d.constraints, Variant::WithConstraints, "Python").unwrap();
    check_golden("dragon_prompt.txt", &p.text);
    assert!(p.warnings.is_empty());
    assert!(p.text.starts_with(d.domain.trim()));
    assert!(p.text.contains(EXACTLY_ONE));
    assert!(p.text.trim_end().ends_with(&CLOSER.replace("{LANG}", "Python")));
    assert!(p.text.contains("Think step by step"));
    // one break per assignment, one before the beyond-control part, one before the strategy
    let breaks = p.text.lines().filter(|l| *l == SECTION_BREAK).count();
    assert_eq!(breaks, d.spec.assignments.len() + 2);
    for method in ["assign_in_village", "assign_in_cave"] {
        assert!(p.text.contains(&format!("def {method}(self, components, environment, group_ids, step)")));
        assert!(p.text.contains(&format!("Method `{method}`")));
    }
    for group in ["farm", "cave", "spawn farmer", "spawn warrior", "attack", "village"] {
        assert!(p.text.contains(&format!("- \"{group}\":")), "{group}");
    }
    assert_eq!(p.text.matches("- \"cave\":").count(), 2);
    assert!(p.text.contains("class called `SmartAdaptation`") && p.text.contains("module `dragon`"));
    assert!(p.text.contains("`environment.dragon`") && p.text.contains("`environment.farm`"));
    for c in &d.constraints {
        assert!(p.text.contains(&c.description));
    }
    assert_eq!(p.messages.len(), 2);
    assert_eq!(p.messages[0].role, Role::System);
    assert_eq!(p.messages[1].content, p.text);
}

#[test]
fn without_constraints_differs_only_by_requirements() {
    let d = Dragon::load();
    let with = generate_prompt(&d.spec, &d.domain, &d.constraints, Variant::WithConstraints, "Python").unwrap();
    let without = generate_prompt(&d.spec, &d.domain, &d.constraints, Variant::WithoutConstraints, "Python").unwrap();
    let block = requirements_block(&d.constraints);
    assert!(!block.is_empty());
    assert_eq!(with.text.replacen(&format!("{block}\n\n"), "", 1), without.text);
    assert!(!without.text.contains("functional requirements"));
}

#[test]
fn missing_strategy_is_omitted_with_warning() {
    let mut d = Dragon::load();
    d.spec.strategy = None;
    let p = generate_prompt(&d.spec, &d.domain, &d.constraints, Variant::WithoutConstraints, "Python").unwrap();
    assert_eq!(p.warnings.len(), 1);
    assert!(!p.text.contains("Warriors head to the Cave"));
    d.spec.am_interface = None;
    assert!(generate_prompt(&d.spec, &d.domain, &d.constraints, Variant::WithoutConstraints, "Python").is_err());
}

#[test]
fn farm_prompt_matches_golden() {
    let spec = parse_adsl(&asset("specs/farm.adsl")).unwrap();
    let constraints = parse_constraints(&asset("constraints/farm.fcl")).unwrap().constraints;
    let p = generate_prompt(&spec, &asset("specs/farm_domain.txt"), &constraints, Variant::WithConstraints, "Python")
        .unwrap();
    check_golden("farm_prompt.txt", &p.text);
    assert!(p.text.contains("- \"idle\":"));
}

fn config(mode: FeedbackMode, scratch: &Path) -> LoopConfig {
    LoopConfig::new(mode, Variant::WithConstraints, scratch)
}

#[test]
fn two_step_fixture_converges_at_iteration_two() {
    let d = Dragon::load();
    let tmp = tempfile::tempdir().unwrap();
    let mut backend = mock("two-step");
    let r = run_loop(&d.ctx(), &mut backend, &config(FeedbackMode::GenericFunctional, tmp.path()));
    assert!(r.valid, "{:#?}", r.records.iter().map(|x| &x.feedback).collect::<Vec<_>>());
    assert_eq!(r.iterations, 2);
    assert_eq!(r.abort, None);
    let first = &r.records[0].report;
    assert!(first
        .violations()
        .all(|(_, v)| v.constraint == GenericRule::ExactlyOneEnsemble.id() && v.step == 1));
    assert!(r.records[0].feedback.contains("exactly-one-ensemble"));
    // the second request carries the first answer and its feedback
    let second = &backend.received[1];
    assert_eq!(second.len(), 4);
    assert_eq!(second[2].role, Role::Assistant);
    assert_eq!(second[3].content, r.records[0].feedback);
}

#[test]
fn one_valid_fixture_stops_immediately() {
    let d = Dragon::load();
    let tmp = tempfile::tempdir().unwrap();
    let r = run_loop(&d.ctx(), &mut mock("one-valid"), &config(FeedbackMode::Metrics, tmp.path()));
    assert!(r.valid);
    assert_eq!(r.iterations, 1);
    assert_eq!(r.records[0].feedback, "");
}

#[test]
fn ten_invalid_responses_abort_at_ten() {
    let d = Dragon::load();
    let tmp = tempfile::tempdir().unwrap();
    let mut backend = mock("ten-invalid");
    let r = run_loop(&d.ctx(), &mut backend, &config(FeedbackMode::GenericOnly, tmp.path()));
    assert!(!r.valid);
    assert_eq!(r.iterations, 10);
    assert_eq!(r.abort, Some(AbortReason::MaxIterations));
    assert!(r.stagnated);
    assert!(!r.records[0].stagnant && r.records[1..].iter().all(|x| x.stagnant));
    // conversation growth: system + prompt, then one answer and one feedback per failed iteration
    for (k, conv) in backend.received.iter().enumerate() {
        assert_eq!(conv.len(), 2 + 2 * k, "iteration {}", k + 1);
        assert_eq!(r.records[k].messages_sent, conv.len());
    }
}

#[test]
fn fresh_start_resets_the_conversation_after_stagnation() {
    let d = Dragon::load();
    let tmp = tempfile::tempdir().unwrap();
    let mut backend = mock("ten-invalid");
    let mut cfg = config(FeedbackMode::GenericFunctional, tmp.path());
    cfg.fresh_start = true;
    cfg.max_iterations = 4;
    let r = run_loop(&d.ctx(), &mut backend, &cfg);
    assert_eq!(r.iterations, 4);
    let sizes: Vec<usize> = backend.received.iter().map(Vec::len).collect();
    assert_eq!(sizes, vec![2, 4, 2, 2]);
}

#[test]
fn validity_does_not_depend_on_the_feedback_mode() {
    let d = Dragon::load();
    for fixture in ["two-step", "one-valid", "ten-invalid"] {
        let verdicts: Vec<(usize, bool, Vec<bool>)> = FeedbackMode::ALL
            .iter()
            .map(|&mode| {
                let tmp = tempfile::tempdir().unwrap();
                let r = run_loop(&d.ctx(), &mut mock(fixture), &config(mode, tmp.path()));
                (r.iterations, r.valid, r.records.iter().map(|x| x.report.is_valid()).collect())
            })
            .collect();
        assert!(verdicts.windows(2).all(|w| w[0] == w[1]), "{fixture}: {verdicts:?}");
    }
}

#[test]
fn exhausted_backend_aborts_with_transport_failure() {
    let d = Dragon::load();
    let tmp = tempfile::tempdir().unwrap();
    let mut backend = MockBackend::new(vec!["no code here".into()]);
    let r = run_loop(&d.ctx(), &mut backend, &config(FeedbackMode::GenericFunctional, tmp.path()));
    assert_eq!(r.iterations, 1);
    assert!(matches!(r.abort, Some(AbortReason::TransportFailure(_))));
    let v: Vec<_> = r.records[0].report.violations().collect();
    assert!(v.iter().all(|(_, v)| v.constraint == "code-validity" && v.detail.contains("no code block")));
}

#[test]
fn transient_errors_are_retried() {
    struct Flaky(usize, MockBackend);
    impl Backend for Flaky {
        fn complete(&mut self, m: &[fclcas::loopgen::Message]) -> Result<String, fclcas::loopgen::BackendError> {
            if self.0 > 0 {
                self.0 -= 1;
                return Err(fclcas::loopgen::BackendError::Transport("reset".into()));
            }
            self.1.complete(m)
        }
    }
    let d = Dragon::load();
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(FeedbackMode::GenericFunctional, tmp.path());
    cfg.backoff = std::time::Duration::from_millis(1);
    let r = run_loop(&d.ctx(), &mut Flaky(2, mock("one-valid")), &cfg);
    assert!(r.valid);
    let r = run_loop(&d.ctx(), &mut Flaky(9, mock("one-valid")), &cfg);
    assert!(matches!(r.abort, Some(AbortReason::TransportFailure(_))));
    assert_eq!(r.iterations, 0);
}

fn sample_report() -> ViolationReport {
    let mut metrics = Metrics::new();
    metrics.insert("win".into(), 0.0);
    metrics.insert("steps".into(), 30.0);
    let functional = fclcas::online::Violation {
        kind: fclcas::online::ViolationKind::Functional,
        constraint: "The dragon has to die before the game is over.".into(),
        constraint_index: Some(0),
        step: 0,
        binding: vec![("d".into(), "dragon".into())],
        detail: "never held".into(),
        subformula: None,
        counts: None,
    };
    ViolationReport {
        runs: vec![RunReport {
            initial_state: "Farmers and Warriors".into(),
            seed: 42,
            steps: 30,
            stop: StopReason::Horizon,
            metrics,
            violations: vec![functional],
        }],
    }
}

#[test]
fn feedback_modes_filter_as_documented() {
    let report = sample_report();
    let full = format_feedback(&report, FeedbackMode::GenericFunctional);
    assert!(full.contains("The dragon has to die") && full.contains("Farmers and Warriors"));
    let generic = format_feedback(&report, FeedbackMode::GenericOnly);
    assert!(!generic.contains("The dragon has to die"));
    assert!(!generic.contains("Functional"));
    let metrics = format_feedback(&report, FeedbackMode::Metrics);
    assert!(metrics.contains("win rate: 0%"), "{metrics}");
    assert!(!metrics.contains("The dragon has to die"));
    assert_eq!(format_feedback(&ViolationReport::default(), FeedbackMode::GenericFunctional), "");
}

#[test]
fn mock_experiment_table_and_histogram() {
    let d = Dragon::load();
    let tmp = tempfile::tempdir().unwrap();
    let base = config(FeedbackMode::GenericFunctional, tmp.path());
    let fixture = root().join("fixtures/two-step");
    let rows = run_experiment(
        &d.ctx(),
        &FeedbackMode::ALL,
        &Variant::ALL,
        10,
        &base,
        || Box::new(MockBackend::from_dir(&fixture).unwrap()),
        Exec::Parallel,
    );
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| r.valid && r.iterations == 2));
    let mut buf = Vec::new();
    write_table(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("mode,variant,repeat,iterations,valid"));
    assert_eq!(text.lines().count(), 61);
    assert_eq!(read_table(&buf[..]).unwrap(), rows);
    let h = histogram(&rows);
    assert_eq!(h.len(), 6);
    for buckets in h.values() {
        assert_eq!(buckets.values().sum::<usize>(), 10);
        assert_eq!(buckets.get(&Bucket::ValidAt(2)), Some(&10));
    }
    assert!(render_histogram(&rows).contains("(10 runs)"));
}
