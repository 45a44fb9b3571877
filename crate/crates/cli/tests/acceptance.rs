//! Acceptance checks, one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fclcas::adsl::{parse_adsl, render_adsl, ArchitectureSpec, InitialState};
use fclcas::amhost::AmEndpoint;
use fclcas::exec::{self, Exec};
use fclcas::fcdsl::{parse_constraints, parse_formula, render};
use fclcas::fcl::{eval_offline, eval_state, ltl_bridge, Component, Constraint, LtlOp, Snapshot, Trace, Value, Vocabulary};
use fclcas::loopgen::{
    generate_prompt, histogram, render_histogram, requirements_block, run_experiment, run_loop, write_table,
    AbortReason, FeedbackMode, LoopConfig, LoopContext, MockBackend, Variant, CLOSER, EXACTLY_ONE, SECTION_BREAK,
};
use fclcas::online::{Horizon, Monitor, ViolationKind};
use fclcas::runtime::{run_batch, RunConfig, StopReason, ViolationReport};
use fclcas::scenarios::ScenarioKind;
use fclcas::testgen::{random_constraint, random_trace, vocabulary, ENSEMBLES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn asset(rel: &str) -> String {
    let path = root().join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn constraints(rel: &str) -> Vec<Constraint> {
    parse_constraints(&asset(rel)).unwrap().constraints
}

fn spec(rel: &str) -> ArchitectureSpec {
    parse_adsl(&asset(rel)).unwrap()
}

fn online_violated(cs: &[Constraint], trace: &Trace, vocab: &Vocabulary, horizon: Horizon) -> BTreeSet<usize> {
    let mut m = Monitor::new(cs.to_vec(), vocab.clone(), horizon).unwrap();
    for s in trace.snapshots() {
        m.step(s).unwrap();
    }
    m.finish().unwrap();
    m.violations().iter().filter_map(|v| v.constraint_index).collect()
}

fn offline_violated(cs: &[Constraint], trace: &Trace, vocab: &Vocabulary) -> BTreeSet<usize> {
    cs.iter()
        .enumerate()
        .filter(|(_, c)| !eval_offline(c, trace, vocab).unwrap().holds())
        .map(|(k, _)| k)
        .collect()
}

fn oracle_equivalence() -> Check {
    const TRACES: u64 = 1000;
    const RANDOM: usize = 200;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xfc1);
    let mut cs = constraints("constraints/dragon.fcl");
    ensure!(cs.len() == 8, "expected 8 dragon constraints, found {}", cs.len());
    cs.extend((0..RANDOM).map(|k| random_constraint(&mut rng, k)));
    let vocab = vocabulary();
    let seeds: Vec<u64> = (0..TRACES).collect();
    let results = exec::map(Exec::Parallel, &seeds, |&seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(1..=40);
        let trace = random_trace(&mut rng, len);
        let expected = offline_violated(&cs, &trace, &vocab);
        let mut diverged = Vec::new();
        for horizon in [Horizon::Known(len), Horizon::Unknown] {
            let got = online_violated(&cs, &trace, &vocab, horizon);
            if got != expected {
                diverged.push(format!("seed {seed} len {len} {horizon:?}: {:?}", got.symmetric_difference(&expected)));
            }
        }
        (expected.len(), diverged)
    });
    let divergences: Vec<String> = results.iter().flat_map(|(_, d)| d.clone()).collect();
    let violated: usize = results.iter().map(|(n, _)| n).sum();
    let elapsed = start.elapsed();
    ensure!(divergences.is_empty(), "{} divergences, first: {}", divergences.len(), divergences[0]);
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    let pairs = TRACES as usize * cs.len();
    ensure!(violated > 0 && violated < pairs, "degenerate verdicts: {violated} of {pairs} violated");
    Ok(format!(
        "{TRACES} traces x {} constraints, 2 horizons, 0 divergences, {violated} violated pairs, {:.1}s",
        cs.len(),
        elapsed.as_secs_f64()
    ))
}

/// Finite-trace LTL over a single atom, straight from the definitions.
enum Ltl {
    Atom,
    True,
    Not(Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
}

fn ltl_holds(f: &Ltl, atom: &[bool], i: usize) -> bool {
    match f {
        Ltl::Atom => atom[i],
        Ltl::True => true,
        Ltl::Not(g) => !ltl_holds(g, atom, i),
        Ltl::Next(g) => i + 1 < atom.len() && ltl_holds(g, atom, i + 1),
        Ltl::Until(a, b) => (i..atom.len()).any(|k| ltl_holds(b, atom, k) && (i..k).all(|j| ltl_holds(a, atom, j))),
    }
}

fn not(f: Ltl) -> Ltl {
    Ltl::Not(Box::new(f))
}

fn next(f: Ltl) -> Ltl {
    Ltl::Next(Box::new(f))
}

fn finally(f: Ltl) -> Ltl {
    Ltl::Until(Box::new(Ltl::True), Box::new(f))
}

fn ltl_bridge_matches() -> Check {
    let atoms = [
        "count(Attack) >= 1",
        "exists v in Villagers: v.location == \"Cave\"",
        "count(SpawnWarrior union SpawnFarmer) < 2",
        "forall d in Dragons: d.hp > 3",
    ];
    let vocab = vocabulary();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut held = [0usize; 3];
    for round in 0..500 {
        let len = rng.gen_range(1..=25);
        let trace = random_trace(&mut rng, len);
        let src = atoms[round % atoms.len()];
        let phi = parse_formula(src).unwrap();
        let atom: Vec<bool> = trace
            .snapshots()
            .iter()
            .map(|s| eval_state(&phi, s, &Vec::new(), &[], &vocab, Some(len)).unwrap())
            .collect();
        // X a, X F a and weak-next G a: the within windows exclude the current step
        let refs = [
            (LtlOp::Next, next(Ltl::Atom)),
            (LtlOp::Future, next(finally(Ltl::Atom))),
            (LtlOp::Globally, not(next(not(not(finally(not(Ltl::Atom))))))),
        ];
        for (k, (op, reference)) in refs.iter().enumerate() {
            let c = Constraint::new("bridge", ltl_bridge(*op, phi.clone()));
            let got = eval_offline(&c, &trace, &vocab).unwrap().holds();
            let want = ltl_holds(reference, &atom, 0);
            ensure!(got == want, "round {round} {op:?} on {src}: got {got}, reference {want}, atoms {atom:?}");
            held[k] += want as usize;
        }
    }
    Ok(format!("500 traces x 3 operators agree; reference held {held:?} times"))
}

fn edge_trace(len: usize, mut at: impl FnMut(usize, &mut Snapshot)) -> Trace {
    let snaps = (0..len)
        .map(|i| {
            let mut s = Snapshot::new(i);
            for e in ENSEMBLES {
                s.ensembles.insert(e.into(), Default::default());
            }
            s.components.insert("dragon".into(), Component::new("Dragon").with("hp", Value::Int(50)));
            at(i, &mut s);
            s
        })
        .collect();
    Trace::new(snaps).unwrap()
}

fn join(s: &mut Snapshot, ensemble: &str, ids: &[&str]) {
    for id in ids {
        s.components.entry(id.to_string()).or_insert_with(|| {
            Component::new("Villager")
                .with("role", "Warrior")
                .with("hp", Value::Int(6))
                .with("location", "Village")
        });
        s.ensembles.get_mut(ensemble).unwrap().insert(id.to_string());
    }
}

fn formula(src: &str) -> Constraint {
    Constraint::new("edge", parse_formula(src).unwrap())
}

/// Offline verdict, cross-checked against the online verdicts under both
/// horizons when the constraint is online-checkable.
fn verdict(c: &Constraint, trace: &Trace) -> Result<bool, String> {
    let vocab = vocabulary();
    let offline = eval_offline(c, trace, &vocab).unwrap().holds();
    if !c.is_online_checkable() {
        return Ok(offline);
    }
    for h in [Horizon::Known(trace.len()), Horizon::Unknown] {
        let online = online_violated(std::slice::from_ref(c), trace, &vocab, h).is_empty();
        ensure!(online == offline, "online {online} vs offline {offline} under {h:?}");
    }
    Ok(offline)
}

fn violation_steps(c: &Constraint, trace: &Trace) -> Vec<usize> {
    let mut m = Monitor::new(vec![c.clone()], vocabulary(), Horizon::Known(trace.len())).unwrap();
    for s in trace.snapshots() {
        m.step(s).unwrap();
    }
    m.finish().unwrap();
    m.violations().iter().map(|v| v.step).collect()
}

fn semantics_edges() -> Check {
    // a count larger than its window can never be met
    let everywhere = edge_trace(12, |_, s| join(s, "Attack", &["v1"]));
    for src in ["within[4, 3] count(Attack) >= 1", "within[6, -5] count(Attack) >= 1"] {
        ensure!(!verdict(&formula(src), &everywhere)?, "{src} held");
    }

    // a literal forward end past the trace behaves like MAX, a literal backward end like BEG
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let len = rng.gen_range(3..=20);
        let trace = random_trace(&mut rng, len);
        for n in 0..3 {
            for (lit, end) in [("60", "MAX"), ("-60", "BEG")] {
                let a = verdict(&formula(&format!("within[{n}, {lit}] count(Attack) >= 1")), &trace)?;
                let b = verdict(&formula(&format!("within[{n}, {end}] count(Attack) >= 1")), &trace)?;
                ensure!(a == b, "[{n}, {lit}] vs [{n}, {end}] differ at len {len}");
            }
        }
    }
    // at step 20 of 31 only 10 steps remain: [1, 15] clamps and is met by an attack at 30
    let late = edge_trace(31, |i, s| {
        if i == 30 {
            join(s, "Attack", &["v1"]);
        }
    });
    let anchored = formula("count(Farm) >= 1 implies within[1, 15] count(Attack) >= 1");
    let farm_at_20 = edge_trace(31, |i, s| {
        if i == 20 {
            join(s, "Farm", &["v2"]);
        }
        if i == 30 {
            join(s, "Attack", &["v1"]);
        }
    });
    ensure!(verdict(&anchored, &farm_at_20)?, "clamped window at step 20 was not satisfied by step 30");
    ensure!(verdict(&anchored, &late)?, "vacuous antecedent failed");

    // the MAX > 0 guard drops the obligation created on the last step
    let sent_last = edge_trace(6, |i, s| {
        if i == 5 {
            join(s, "GoToCave", &["v1"]);
        }
    });
    let guarded = formula("forall v in Villagers: v in GoToCave and MAX > 0 implies within[1, MAX] v in Attack");
    let unguarded = formula("forall v in Villagers: v in GoToCave implies within[1, MAX] v in Attack");
    ensure!(verdict(&guarded, &sent_last)?, "guarded constraint violated on the last step");
    ensure!(!verdict(&unguarded, &sent_last)?, "unguarded constraint held");

    // the backward-window spawn rule on three hand-built traces
    let spawn = constraints("constraints/dragon_spawn_every_10.fcl").remove(0);
    let never = edge_trace(31, |_, _| {});
    ensure!(!verdict(&spawn, &never)?, "never spawning held");
    let steps = violation_steps(&spawn, &never);
    ensure!(steps == (10..=30).collect::<Vec<_>>(), "never spawning: violations at {steps:?}");
    let every_five = edge_trace(31, |i, s| {
        if i > 0 && i % 5 == 0 {
            join(s, "SpawnWarrior", &["v1", "v2"]);
        }
    });
    ensure!(verdict(&spawn, &every_five)?, "spawning every 5 steps violated");
    let gap = edge_trace(31, |i, s| {
        if (1..=5).contains(&i) || i >= 17 {
            join(s, "SpawnWarrior", &["v1", "v2"]);
        }
    });
    ensure!(!verdict(&spawn, &gap)?, "ten-step gap held");
    let steps = violation_steps(&spawn, &gap);
    ensure!(steps == vec![16], "ten-step gap: violations at {steps:?}");
    Ok("impossible counts, clamping, last-step guard and three backward-window traces".into())
}

fn dragon_report(am: &str) -> ViolationReport {
    let spec = spec("specs/dragon.adsl");
    let cs = constraints("constraints/dragon.fcl");
    let cfg = RunConfig {
        scenario: ScenarioKind::Dragon,
        spec: &spec,
        constraints: &cs,
    };
    run_batch(&cfg, &AmEndpoint::parse(am).unwrap(), &spec.initial_states, Exec::Sequential).unwrap()
}

fn dragon_hunt() -> Check {
    let spec = spec("specs/dragon.adsl");
    let seeds: Vec<(String, u64)> = spec.initial_states.iter().map(|s| (s.name.clone(), s.seed)).collect();
    ensure!(
        seeds == vec![("Farmers and Warriors".to_string(), 42), ("No Warriors".to_string(), 123)],
        "initial states {seeds:?}"
    );
    let base = dragon_report("builtin:dragon-baseline");
    ensure!(base.is_valid(), "baseline violations: {:?}", base.violations().collect::<Vec<_>>());
    for r in &base.runs {
        ensure!(
            r.stop == StopReason::Terminal && r.metrics["win"] == 1.0 && r.steps <= 30,
            "baseline in {}: {:?} after {} steps",
            r.initial_state,
            r.stop,
            r.steps
        );
    }
    let idle = dragon_report("builtin:dragon-idle");
    for r in &idle.runs {
        let functional: BTreeSet<&str> = r
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Functional)
            .map(|v| v.constraint.as_str())
            .collect();
        ensure!(functional.len() >= 3, "idle AM in {}: only {functional:?}", r.initial_state);
        ensure!(r.metrics["win"] == 0.0, "idle AM won in {}", r.initial_state);
    }
    for (am, rule) in [
        ("builtin:dragon-double", "exactly-one-ensemble"),
        ("builtin:dragon-wrong-group", "appropriate-ensembles"),
    ] {
        let report = dragon_report(am);
        let rules: BTreeSet<&str> = report.violations().map(|(_, v)| v.constraint.as_str()).collect();
        ensure!(rules == BTreeSet::from([rule]), "{am}: {rules:?}");
        ensure!(report.runs.iter().all(|r| r.stop == StopReason::Generic), "{am} was not stopped");
    }
    let wins: Vec<usize> = base.runs.iter().map(|r| r.steps).collect();
    Ok(format!("baseline wins in {wins:?} steps, idle loses, both generic stubs caught"))
}

fn simulate(out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_fclcas"))
        .current_dir(root())
        .args(["simulate", "--scenario", "dragon", "--am", "builtin:dragon-baseline", "--seed", "42", "--trace"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(status.status.success(), "simulate failed: {}", String::from_utf8_lossy(&status.stderr));
    Ok(())
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a.jsonl"), tmp.path().join("b.jsonl"));
    simulate(&a)?;
    simulate(&b)?;
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    ensure!(!a.is_empty(), "empty trace");
    ensure!(a == b, "traces differ");
    Ok(format!("two traces of {} bytes are identical", a.len()))
}

fn prompt_golden() -> Check {
    let spec = spec("specs/dragon.adsl");
    let cs = constraints("constraints/dragon.fcl");
    let domain = asset("specs/dragon_domain.txt");
    let with = generate_prompt(&spec, &domain, &cs, Variant::WithConstraints, "Python").unwrap();
    let golden = asset("crates/core/tests/golden/dragon_prompt.txt");
    ensure!(with.text == golden, "prompt differs from the golden file");
    let breaks = with.text.lines().filter(|l| *l == SECTION_BREAK).count();
    ensure!(breaks == 4, "{breaks} section breaks");
    for method in ["assign_in_village", "assign_in_cave"] {
        ensure!(with.text.contains(method), "missing {method}");
    }
    let groups: Vec<&str> = with
        .text
        .lines()
        .filter_map(|l| l.strip_prefix("- \"").and_then(|r| r.split('"').next()))
        .collect();
    let expected = ["farm", "cave", "spawn farmer", "spawn warrior", "attack", "village", "cave"];
    let mut sorted = groups.clone();
    sorted.sort();
    let mut want = expected.to_vec();
    want.sort();
    ensure!(sorted == want, "group ids {groups:?}");
    ensure!(with.text.contains(EXACTLY_ONE), "missing exactly-one sentence");
    ensure!(with.text.trim_end().ends_with(&CLOSER.replace("{LANG}", "Python")), "missing closer");
    ensure!(with.text.contains("Think step by step"), "missing closer marker");
    let without = generate_prompt(&spec, &domain, &cs, Variant::WithoutConstraints, "Python").unwrap();
    let block = requirements_block(&cs);
    ensure!(
        with.text.replacen(&format!("{block}\n\n"), "", 1) == without.text,
        "variants differ beyond the requirements block"
    );
    Ok(format!("golden match, {breaks} breaks, {} group entries", groups.len()))
}

fn loop_on_mocks() -> Check {
    let spec = spec("specs/dragon.adsl");
    let cs = constraints("constraints/dragon.fcl");
    let domain = asset("specs/dragon_domain.txt");
    let ctx = LoopContext {
        scenario: ScenarioKind::Dragon,
        spec: &spec,
        constraints: &cs,
        domain: &domain,
        states: &spec.initial_states,
    };
    let mock = |name: &str| MockBackend::from_dir(&root().join("fixtures").join(name)).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let mut outcomes = Vec::new();
    for fixture in ["two-step", "ten-invalid"] {
        let per_mode: Vec<(usize, bool, Option<AbortReason>)> = FeedbackMode::ALL
            .iter()
            .map(|&mode| {
                let dir = tmp.path().join(format!("{fixture}-{}", mode.name().replace('+', "-")));
                let r = run_loop(&ctx, &mut mock(fixture), &LoopConfig::new(mode, Variant::WithConstraints, &dir));
                (r.iterations, r.valid, r.abort)
            })
            .collect();
        ensure!(per_mode.windows(2).all(|w| w[0] == w[1]), "{fixture} depends on the mode: {per_mode:?}");
        outcomes.push(per_mode[0].clone());
    }
    ensure!(outcomes[0] == (2, true, None), "two-step: {:?}", outcomes[0]);
    ensure!(
        outcomes[1] == (10, false, Some(AbortReason::MaxIterations)),
        "ten-invalid: {:?}",
        outcomes[1]
    );
    let fixture = root().join("fixtures/two-step");
    let rows = run_experiment(
        &ctx,
        &FeedbackMode::ALL,
        &Variant::ALL,
        10,
        &LoopConfig::new(FeedbackMode::GenericFunctional, Variant::WithConstraints, tmp.path().join("exp")),
        || Box::new(MockBackend::from_dir(&fixture).unwrap()),
        Exec::Parallel,
    );
    let mut table = Vec::new();
    write_table(&rows, &mut table).unwrap();
    let lines = String::from_utf8(table).unwrap().lines().count();
    ensure!(rows.len() == 60 && lines == 61, "{} rows, {lines} table lines", rows.len());
    let h = histogram(&rows);
    ensure!(h.len() == 6, "{} histogram cells", h.len());
    let total: usize = h.values().flat_map(|b| b.values()).sum();
    ensure!(h.values().all(|b| b.values().sum::<usize>() == 10) && total == 60, "histogram sums to {total}");
    ensure!(render_histogram(&rows).matches("(10 runs)").count() == 6, "rendered histogram is off");
    Ok("two-step converges at 2, ten-invalid aborts at 10 in all modes, 60-row table".into())
}

fn smart_farm() -> Check {
    let spec = spec("specs/farm.adsl");
    let cs = constraints("constraints/farm.fcl");
    ensure!(cs.len() == 6, "{} farm constraints", cs.len());
    let cfg = RunConfig {
        scenario: ScenarioKind::Farm,
        spec: &spec,
        constraints: &cs,
    };
    let base = spec.initial_states[0].clone();
    let states: Vec<InitialState> = (1..=10)
        .map(|seed| InitialState {
            name: format!("seed {seed}"),
            seed,
            ..base.clone()
        })
        .collect();
    let run = |am: &str| run_batch(&cfg, &AmEndpoint::parse(am).unwrap(), &states, Exec::Parallel).unwrap();
    let coordinated = run("builtin:farm-baseline");
    let fixed = run("builtin:farm-static");
    ensure!(
        coordinated.is_valid(),
        "baseline violations: {:?}",
        coordinated.violations().collect::<Vec<_>>()
    );
    let wins = coordinated
        .runs
        .iter()
        .zip(&fixed.runs)
        .filter(|(a, b)| a.metrics["damage_rate"] < b.metrics["damage_rate"])
        .count();
    ensure!(wins >= 9, "baseline lower in {wins}/10 runs");
    let mean = |r: &ViolationReport| r.mean_metrics()["damage_rate"];
    Ok(format!(
        "lower damage in {wins}/10 seeds (mean {:.3} vs {:.3}), 0 violations",
        mean(&coordinated),
        mean(&fixed)
    ))
}

fn parser_round_trips() -> Check {
    let mut files = 0;
    for dir in ["specs", "constraints"] {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(root().join(dir))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for path in entries {
            let text = std::fs::read_to_string(&path).unwrap();
            match path.extension().and_then(|e| e.to_str()) {
                Some("adsl") => {
                    let a = parse_adsl(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                    let b = parse_adsl(&render_adsl(&a)).map_err(|e| format!("{} rendered: {e}", path.display()))?;
                    ensure!(a == b, "{} changed on round trip", path.display());
                }
                Some("fcl") => {
                    let a = parse_constraints(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                    let b = parse_constraints(&render(&a.constraints))
                        .map_err(|e| format!("{} rendered: {e}", path.display()))?;
                    ensure!(a.constraints == b.constraints, "{} changed on round trip", path.display());
                }
                _ => continue,
            }
            files += 1;
        }
    }
    // the nine example constraints, written out independently of the corpus files
    let warriors = "let Warriors = {v in Villagers | v.role == \"Warrior\"}";
    let nine = [
        "forall d in Dragons: within[1, MAX] d.hp <= 0".to_string(),
        "within[1, 15] count(Attack) >= 1".to_string(),
        "let Farmers = {v in Villagers | v.role == \"Farmer\"}\nforall f in Farmers: within[MAX, MAX] f.location == \"Village\"".to_string(),
        format!("{warriors}\nforall w in Warriors: within[1, MAX] w in GoToCave"),
        "within[3, MAX] count(SpawnWarrior) >= 2".to_string(),
        "within[3, MAX] count(SpawnFarmer) >= 2".to_string(),
        "forall v in Villagers: v in GoToCave and MAX > 0 implies within[1, MAX] v in Attack".to_string(),
        format!(
            "{warriors}\nlet InCave = {{v in Villagers | v.location == \"Cave\"}}\n\
             within[0.8*MAX, MAX] count(Warriors intersect InCave) >= 0.5 * count(Warriors)"
        ),
        "within[10, -10] count(SpawnWarrior) < 2 implies count(SpawnWarrior) >= 2".to_string(),
    ];
    let mut corpus = constraints("constraints/dragon.fcl");
    corpus.extend(constraints("constraints/dragon_spawn_every_10.fcl"));
    for src in &nine {
        let doc = format!("constraint \"x\"\n  {}\n", src.replace('\n', "\n  "));
        let want = parse_constraints(&doc).map_err(|e| format!("{src}: {e}"))?.constraints.remove(0);
        ensure!(
            corpus.iter().any(|c| c.lets == want.lets && c.body == want.body),
            "not in the corpus: {src}"
        );
    }
    Ok(format!("{files} files round-trip, all nine example constraints present"))
}

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("LTL bridge", ltl_bridge_matches),
        ("semantics edge cases", semantics_edges),
        ("Dragon Hunt reproduction", dragon_hunt),
        ("determinism", determinism),
        ("prompt golden", prompt_golden),
        ("loop on mocks", loop_on_mocks),
        ("Smart Farm property", smart_farm),
        ("parser round trips", parser_round_trips),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(note) => println!("criterion {}: PASS  {name}: {note}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
