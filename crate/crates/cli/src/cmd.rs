use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use fclcas::adsl::{parse_adsl, ArchitectureSpec, InitialState};
use fclcas::amhost::AmEndpoint;
use fclcas::exec::{self, Exec};
use fclcas::fcdsl::{parse_constraints, validate};
use fclcas::fcl::{eval_offline, Constraint, Trace, Vocabulary};
use fclcas::loopgen::{
    format_feedback, generate_prompt, render_histogram, run_experiment, run_loop, write_table, Backend, FeedbackMode,
    HttpBackend, LoopConfig, LoopContext, LoopResult, MockBackend, Variant,
};
use fclcas::online::{classify, render_feedback, Horizon, Monitor};
use fclcas::runtime::{run as run_one, RunConfig, ViolationReport};
use fclcas::scenarios::ScenarioKind;

use crate::{Command, Format, GenArgs, SystemArgs};

pub const OK: u8 = 0;
pub const VIOLATIONS: u8 = 1;
pub const USAGE: u8 = 2;
pub const DIVERGENCE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: USAGE,
        message: message.into(),
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<ArchitectureSpec> {
    let spec = parse_adsl(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    spec.validate().map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("  {e}")).collect();
        usage(format!("{}: invalid specification\n{}", path.display(), lines.join("\n")))
    })?;
    Ok(spec)
}

fn load_constraints(path: &Path) -> Result<Vec<Constraint>> {
    Ok(parse_constraints(&read(path)?)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?
        .constraints)
}

fn cross_check(spec: &ArchitectureSpec, constraints: &[Constraint], path: &Path) -> Result<()> {
    validate(constraints, &spec.vocabulary(), Some(&spec.attribute_names())).map_err(|errs| {
        let lines: Vec<String> = errs
            .iter()
            .map(|e| format!("  [{}] \"{}\": {}", e.index + 1, e.description, e.message))
            .collect();
        usage(format!("{}: constraints do not match the specification\n{}", path.display(), lines.join("\n")))
    })?;
    Monitor::new(constraints.to_vec(), spec.vocabulary(), Horizon::Unknown)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(())
}

struct System {
    scenario: ScenarioKind,
    spec: ArchitectureSpec,
    constraints: Vec<Constraint>,
}

impl SystemArgs {
    fn scenario(&self) -> Result<ScenarioKind> {
        ScenarioKind::parse(&self.scenario).ok_or_else(|| usage(format!("unknown scenario `{}`", self.scenario)))
    }

    fn load(&self) -> Result<System> {
        let scenario = self.scenario()?;
        let spec_path = self
            .spec
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("specs/{}.adsl", scenario.name())));
        let fcl_path = self
            .constraints
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("constraints/{}.fcl", scenario.name())));
        let spec = load_spec(&spec_path)?;
        let constraints = load_constraints(&fcl_path)?;
        cross_check(&spec, &constraints, &fcl_path)?;
        for state in &spec.initial_states {
            scenario
                .validate(state)
                .map_err(|e| usage(format!("initial state \"{}\": {e}", state.name)))?;
        }
        Ok(System {
            scenario,
            spec,
            constraints,
        })
    }
}

fn domain_path(domain: &Option<PathBuf>, scenario: ScenarioKind) -> PathBuf {
    domain
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("specs/{}_domain.txt", scenario.name())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn io_failure(path: &Path, e: impl fmt::Display) -> Failure {
    usage(format!("{}: {e}", path.display()))
}

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Check { spec, constraints } => check(&spec, &constraints),
        Command::Simulate {
            system,
            am,
            initial_state,
            seed,
            params,
            trace,
            report,
            format,
        } => simulate(&system, &am, initial_state, seed, &params, trace, report, format),
        Command::Verify {
            trace,
            constraints,
            spec,
            online,
            offline,
            both,
            format,
        } => verify(&trace, &constraints, spec, online, offline, both, format),
        Command::Prompt {
            system,
            domain,
            variant,
            language,
        } => prompt(&system, &domain, &variant, &language),
        Command::Loop {
            gen,
            mode,
            variant,
            format,
        } => gen_loop(&gen, &mode, &variant, format),
        Command::Experiment {
            gen,
            repeats,
            modes,
            variants,
            out,
            jobs,
        } => experiment(&gen, repeats, &modes, &variants, &out, jobs),
        Command::Report { input, render } => report(&input, &render),
    }
}

fn check(spec_path: &Path, fcl_path: &Path) -> Result<u8> {
    let spec = load_spec(spec_path)?;
    let constraints = load_constraints(fcl_path)?;
    cross_check(&spec, &constraints, fcl_path)?;
    if let Some(kind) = spec
        .am_interface
        .as_ref()
        .and_then(|am| ScenarioKind::parse(&am.module))
    {
        for state in &spec.initial_states {
            kind.validate(state)
                .map_err(|e| usage(format!("initial state \"{}\": {e}", state.name)))?;
        }
    }
    println!(
        "{}: {} component types, {} ensembles, {} assignments, {} initial states",
        spec_path.display(),
        spec.components.len(),
        spec.ensembles.len(),
        spec.assignments.len(),
        spec.initial_states.len()
    );
    println!("{}: {} constraints", fcl_path.display(), constraints.len());
    for (k, c) in constraints.iter().enumerate() {
        let shape = classify(c).map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default();
        println!("  [{}] {shape:<9} {}", k + 1, c.description);
    }
    Ok(OK)
}

fn apply_params(state: &mut InitialState, params: &[String]) -> Result<()> {
    for p in params {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| usage(format!("--param expects NAME=VALUE, got `{p}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("--param {name}: `{value}` is not a number")))?;
        state.params.insert(name.trim().to_string(), value);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    system: &SystemArgs,
    am: &str,
    initial_state: Option<String>,
    seed: Option<u64>,
    params: &[String],
    trace_path: Option<PathBuf>,
    report_path: Option<PathBuf>,
    format: Format,
) -> Result<u8> {
    let sys = system.load()?;
    let mut state = match &initial_state {
        Some(name) => sys
            .spec
            .initial_state(name)
            .cloned()
            .ok_or_else(|| usage(format!("no initial state named \"{name}\"")))?,
        None => sys
            .spec
            .initial_states
            .first()
            .cloned()
            .ok_or_else(|| usage("the specification defines no initial state"))?,
    };
    if let Some(seed) = seed {
        state.seed = seed;
    }
    apply_params(&mut state, params)?;
    sys.scenario.validate(&state).map_err(|e| usage(e.to_string()))?;
    let endpoint = AmEndpoint::parse(am).map_err(usage)?;
    let cfg = RunConfig {
        scenario: sys.scenario,
        spec: &sys.spec,
        constraints: &sys.constraints,
    };
    let (report, trace) = match endpoint.open() {
        Ok(mut m) => {
            let out = run_one(&cfg, m.as_mut(), &state).map_err(|e| usage(e.to_string()))?;
            (ViolationReport { runs: vec![out.report] }, Some(out.trace))
        }
        Err(e) => {
            let v = fclcas::runtime::host_violation(&e, 0);
            let run = fclcas::runtime::RunReport {
                initial_state: state.name.clone(),
                seed: state.seed,
                steps: 0,
                stop: fclcas::runtime::StopReason::Generic,
                metrics: Default::default(),
                violations: vec![v],
            };
            (ViolationReport { runs: vec![run] }, None)
        }
    };
    if let (Some(path), Some(trace)) = (&trace_path, &trace) {
        let mut w = create(path)?;
        trace.write_jsonl(&mut w).and_then(|_| w.flush()).map_err(|e| io_failure(path, e))?;
    }
    if let Some(path) = &report_path {
        let mut w = create(path)?;
        report.write_jsonl(&mut w).and_then(|_| w.flush()).map_err(|e| io_failure(path, e))?;
    }
    match format {
        Format::Records => report.write_jsonl(std::io::stdout().lock()).map_err(|e| usage(e.to_string()))?,
        Format::Text => print!("{}", render_report(&report)),
    }
    Ok(if report.is_valid() { OK } else { VIOLATIONS })
}

fn render_report(report: &ViolationReport) -> String {
    let mut out = String::new();
    for r in &report.runs {
        out.push_str(&format!(
            "initial state \"{}\" (seed {}): {} steps, stopped: {:?}\n",
            r.initial_state, r.seed, r.steps, r.stop
        ));
        let metrics: Vec<String> = r.metrics.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!("  metrics: {}\n", metrics.join(" ")));
        if r.violations.is_empty() {
            out.push_str("  no violations\n");
        } else {
            out.push_str(&format!("  {} violations:\n", r.violations.len()));
            for line in render_feedback(&r.violations).lines() {
                out.push_str(&format!("  {line}\n"));
            }
        }
    }
    out
}

fn verify(
    trace_path: &Path,
    fcl_path: &Path,
    spec: Option<PathBuf>,
    online: bool,
    offline: bool,
    both: bool,
    format: Format,
) -> Result<u8> {
    let file = File::open(trace_path).map_err(|e| io_failure(trace_path, e))?;
    let trace = Trace::read_jsonl(BufReader::new(file)).map_err(|e| io_failure(trace_path, e))?;
    let constraints = load_constraints(fcl_path)?;
    let vocab = match &spec {
        Some(p) => load_spec(p)?.vocabulary(),
        None => Vocabulary::infer(&trace),
    };
    validate(&constraints, &vocab, None).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("  [{}] {}", e.index + 1, e.message)).collect();
        usage(format!("{}:\n{}", fcl_path.display(), lines.join("\n")))
    })?;
    let run_online = online || both || !offline;
    let run_offline = offline || both;

    let mut online_set = BTreeSet::new();
    let mut online_violations = Vec::new();
    if run_online {
        let mut monitor =
            Monitor::new(constraints.clone(), vocab.clone(), Horizon::Unknown).map_err(|e| usage(e.to_string()))?;
        for s in trace.snapshots() {
            monitor.step(s).map_err(|e| usage(e.to_string()))?;
        }
        monitor.finish().map_err(|e| usage(e.to_string()))?;
        online_violations = monitor.violations().to_vec();
        online_set = online_violations.iter().filter_map(|v| v.constraint_index).collect();
    }
    let mut offline_set = BTreeSet::new();
    if run_offline {
        for (k, c) in constraints.iter().enumerate() {
            let verdict = eval_offline(c, &trace, &vocab).map_err(|e| usage(format!("[{}] {e}", k + 1)))?;
            if !verdict.holds() {
                offline_set.insert(k);
            }
            if !run_online && format == Format::Text {
                match verdict.earliest() {
                    None => println!("[{}] holds: {}", k + 1, c.description),
                    Some(w) => println!(
                        "[{}] VIOLATED at step {}{}: {}",
                        k + 1,
                        w.anchor,
                        binding_suffix(&w.binding),
                        c.description
                    ),
                }
            }
        }
    }
    if run_online {
        match format {
            Format::Records => {
                for v in &online_violations {
                    println!("{}", serde_json::to_string(v).map_err(|e| usage(e.to_string()))?);
                }
            }
            Format::Text => {
                for (k, c) in constraints.iter().enumerate() {
                    let status = if online_set.contains(&k) { "VIOLATED" } else { "holds" };
                    println!("[{}] {status}: {}", k + 1, c.description);
                }
                if !online_violations.is_empty() {
                    print!("{}", render_feedback(&online_violations));
                }
            }
        }
    }
    let violated = if run_online { &online_set } else { &offline_set };
    if both {
        if online_set != offline_set {
            eprintln!("oracle disagreement: online {online_set:?}, offline {offline_set:?}");
            return Ok(DIVERGENCE);
        }
        eprintln!("oracle agreement on {} constraints", constraints.len());
    }
    Ok(if violated.is_empty() { OK } else { VIOLATIONS })
}

fn binding_suffix(b: &[(String, String)]) -> String {
    if b.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = b.iter().map(|(v, id)| format!("{v}={id}")).collect();
    format!(" for {}", parts.join(", "))
}

fn parse_variant(s: &str) -> Result<Variant> {
    Variant::parse(s).ok_or_else(|| usage(format!("unknown variant `{s}`; use with-constraints or without-constraints")))
}

fn parse_mode(s: &str) -> Result<FeedbackMode> {
    FeedbackMode::parse(s)
        .ok_or_else(|| usage(format!("unknown feedback mode `{s}`; use generic+functional, generic-only or metrics")))
}

fn prompt(system: &SystemArgs, domain: &Option<PathBuf>, variant: &str, language: &str) -> Result<u8> {
    let sys = system.load()?;
    let domain = read(&domain_path(domain, sys.scenario))?;
    let p = generate_prompt(&sys.spec, &domain, &sys.constraints, parse_variant(variant)?, language)
        .map_err(|e| usage(e.to_string()))?;
    for w in &p.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", p.text);
    Ok(OK)
}

enum BackendSpec {
    Mock(PathBuf),
    Http(HttpBackend),
}

impl BackendSpec {
    fn parse(gen: &GenArgs) -> Result<BackendSpec> {
        if let Some(dir) = gen.backend.strip_prefix("mock:") {
            let dir = PathBuf::from(dir);
            MockBackend::from_dir(&dir).map_err(|e| usage(e.to_string()))?;
            return Ok(BackendSpec::Mock(dir));
        }
        if gen.backend == "http" {
            let mut b = HttpBackend::new(&gen.base_url, &gen.model, &gen.api_key_env);
            b.temperature = gen.temperature;
            if std::env::var_os(&gen.api_key_env).is_none() {
                return Err(usage(format!("environment variable `{}` with the API key is not set", gen.api_key_env)));
            }
            return Ok(BackendSpec::Http(b));
        }
        Err(usage(format!("unknown backend `{}`; use mock:<dir> or http", gen.backend)))
    }

    fn make(&self) -> Box<dyn Backend> {
        match self {
            BackendSpec::Mock(dir) => Box::new(MockBackend::from_dir(dir).expect("fixture directory was readable")),
            BackendSpec::Http(b) => Box::new(b.clone()),
        }
    }
}

struct Scratch {
    path: PathBuf,
    _temp: Option<tempfile::TempDir>,
}

fn scratch(gen: &GenArgs) -> Result<Scratch> {
    match &gen.scratch {
        Some(p) => Ok(Scratch {
            path: p.clone(),
            _temp: None,
        }),
        None => {
            let t = tempfile::Builder::new()
                .prefix("fclcas-")
                .tempdir()
                .map_err(|e| usage(e.to_string()))?;
            Ok(Scratch {
                path: t.path().to_path_buf(),
                _temp: Some(t),
            })
        }
    }
}

fn loop_config(gen: &GenArgs, mode: FeedbackMode, variant: Variant, scratch: &Path) -> LoopConfig {
    let mut cfg = LoopConfig::new(mode, variant, scratch);
    cfg.max_iterations = gen.max_iter;
    cfg.fresh_start = gen.fresh_start;
    cfg.language = gen.language.clone();
    cfg
}

fn print_loop(result: &LoopResult) {
    for r in &result.records {
        let status = if r.report.is_valid() {
            "valid".to_string()
        } else {
            format!("{} violations", r.report.violation_count())
        };
        let stagnant = if r.stagnant { " (same report as before)" } else { "" };
        println!("iteration {}: {status}{stagnant}", r.iteration);
    }
    match (&result.valid, &result.abort) {
        (true, _) => println!("valid adaptation manager after {} iterations", result.iterations),
        (false, Some(reason)) => println!("no valid adaptation manager after {} iterations: {reason:?}", result.iterations),
        (false, None) => println!("no valid adaptation manager"),
    }
}

fn gen_loop(gen: &GenArgs, mode: &str, variant: &str, format: Format) -> Result<u8> {
    let sys = gen.system.load()?;
    let domain = read(&domain_path(&gen.domain, sys.scenario))?;
    let backend = BackendSpec::parse(gen)?;
    let scratch = scratch(gen)?;
    let cfg = loop_config(gen, parse_mode(mode)?, parse_variant(variant)?, &scratch.path);
    let ctx = LoopContext {
        scenario: sys.scenario,
        spec: &sys.spec,
        constraints: &sys.constraints,
        domain: &domain,
        states: &sys.spec.initial_states,
    };
    let mut b = backend.make();
    let result = run_loop(&ctx, b.as_mut(), &cfg);
    match format {
        Format::Records => println!("{}", serde_json::to_string(&result).map_err(|e| usage(e.to_string()))?),
        Format::Text => print_loop(&result),
    }
    Ok(if result.valid { OK } else { VIOLATIONS })
}

fn experiment(
    gen: &GenArgs,
    repeats: usize,
    modes: &[String],
    variants: &[String],
    out: &Path,
    jobs: Option<usize>,
) -> Result<u8> {
    let sys = gen.system.load()?;
    let domain = read(&domain_path(&gen.domain, sys.scenario))?;
    let backend = BackendSpec::parse(gen)?;
    let scratch = scratch(gen)?;
    let modes: Vec<FeedbackMode> = if modes.is_empty() {
        FeedbackMode::ALL.to_vec()
    } else {
        modes.iter().map(|m| parse_mode(m)).collect::<Result<_>>()?
    };
    let variants: Vec<Variant> = if variants.is_empty() {
        Variant::ALL.to_vec()
    } else {
        variants.iter().map(|v| parse_variant(v)).collect::<Result<_>>()?
    };
    let base = loop_config(gen, modes[0], variants[0], &scratch.path);
    let ctx = LoopContext {
        scenario: sys.scenario,
        spec: &sys.spec,
        constraints: &sys.constraints,
        domain: &domain,
        states: &sys.spec.initial_states,
    };
    let mode = if jobs == Some(1) { Exec::Sequential } else { Exec::Parallel };
    let rows = exec::with_jobs(jobs, || {
        run_experiment(&ctx, &modes, &variants, repeats, &base, || backend.make(), mode)
    });
    let w = create(out)?;
    write_table(&rows, w).map_err(|e| io_failure(out, e))?;
    print!("{}", render_histogram(&rows));
    Ok(OK)
}

fn report(input: &Path, render: &str) -> Result<u8> {
    let file = File::open(input).map_err(|e| io_failure(input, e))?;
    let report = ViolationReport::read_jsonl(BufReader::new(file)).map_err(|e| io_failure(input, e))?;
    match render {
        "text" => print!("{}", render_report(&report)),
        other => {
            let mode = other
                .strip_prefix("feedback:")
                .ok_or_else(|| usage(format!("unknown rendering `{other}`; use text or feedback:<mode>")))?;
            println!("{}", format_feedback(&report, parse_mode(mode)?));
        }
    }
    Ok(if report.is_valid() { OK } else { VIOLATIONS })
}
