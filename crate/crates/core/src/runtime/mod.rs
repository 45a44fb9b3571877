//! The adaptation loop: snapshot, AM calls, generic checks, scenario update,
//! online monitoring.

mod report;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::adsl::{ArchitectureSpec, InitialState};
use crate::amhost::{AdaptationManager, AmEndpoint, AssignRequest, AssignResponse, ComponentView, HostError};
use crate::exec::{self, Exec};
use crate::fcl::{Constraint, Snapshot, Trace};
use crate::online::{Horizon, LoadError, Monitor, MonitorError, Note, Violation};
use crate::scenarios::{Metrics, ParamError, ScenarioKind, Update};

pub use report::{ReportRecord, RunReport, StopReason, ViolationReport};

/// Domain-independent validity rules; ids are stable for feedback text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenericRule {
    CodeValidity,
    RuntimeException,
    AppropriateEnsembles,
    ExactlyOneEnsemble,
}

impl GenericRule {
    pub const ALL: [GenericRule; 4] = [
        GenericRule::CodeValidity,
        GenericRule::RuntimeException,
        GenericRule::AppropriateEnsembles,
        GenericRule::ExactlyOneEnsemble,
    ];

    pub fn id(self) -> &'static str {
        match self {
            GenericRule::CodeValidity => "code-validity",
            GenericRule::RuntimeException => "runtime-exception",
            GenericRule::AppropriateEnsembles => "appropriate-ensembles",
            GenericRule::ExactlyOneEnsemble => "exactly-one-ensemble",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            GenericRule::CodeValidity => "The response must contain code defining the requested class",
            GenericRule::RuntimeException => "The adaptation manager must not raise exceptions",
            GenericRule::AppropriateEnsembles => "Each method may only use the group ids it was given",
            GenericRule::ExactlyOneEnsemble => "Each component must be assigned to exactly one group",
        }
    }

    pub fn from_id(id: &str) -> Option<GenericRule> {
        GenericRule::ALL.into_iter().find(|r| r.id() == id)
    }

    pub fn violation(self, step: usize, detail: impl Into<String>) -> Violation {
        Violation::generic(self.id(), step, detail)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error("scenario rejected a checked update: {0}")]
    Scenario(#[from] crate::scenarios::ScenarioError),
    #[error("spec has no assignment for the scenario")]
    NoAssignments,
}

/// Inputs shared by every run of a batch.
#[derive(Clone)]
pub struct RunConfig<'a> {
    pub scenario: ScenarioKind,
    pub spec: &'a ArchitectureSpec,
    pub constraints: &'a [Constraint],
}

pub struct RunOutcome {
    pub report: RunReport,
    pub trace: Trace,
    pub notes: Vec<Note>,
}

/// Checks one assignment call's answer and folds it into `update`.
fn check_response(
    spec: &ArchitectureSpec,
    assignment: &crate::adsl::Assignment,
    request: &AssignRequest,
    pairs: &[(String, String)],
    update: &mut Update,
    step: usize,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let allowed: BTreeSet<&str> = request.components.iter().map(|c| c.id.as_str()).collect();
    let mut seen: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (id, group) in pairs {
        if !allowed.contains(id.as_str()) {
            out.push(GenericRule::AppropriateEnsembles.violation(
                step,
                format!(
                    "`{}` assigned component `{id}`, which was not among its components",
                    assignment.method
                ),
            ));
            continue;
        }
        match spec.ensemble_for_group(assignment, group) {
            None => out.push(GenericRule::AppropriateEnsembles.violation(
                step,
                format!(
                    "`{}` assigned `{id}` to group \"{group}\"; valid groups are {}",
                    assignment.method,
                    request.group_ids.iter().map(|g| format!("\"{g}\"")).collect::<Vec<_>>().join(", ")
                ),
            )),
            Some(ensemble) => {
                if update.contains_key(id) && !seen.contains_key(id.as_str()) {
                    // already assigned by an earlier method this step
                    out.push(GenericRule::ExactlyOneEnsemble.violation(
                        step,
                        format!("`{id}` was assigned by more than one method"),
                    ));
                }
                update.insert(id.clone(), ensemble.to_string());
            }
        }
        seen.entry(id.as_str()).or_default().push(group.as_str());
    }
    for (id, groups) in &seen {
        if groups.len() > 1 {
            out.push(GenericRule::ExactlyOneEnsemble.violation(
                step,
                format!(
                    "`{}` assigned `{id}` to {} groups: {}",
                    assignment.method,
                    groups.len(),
                    groups.iter().map(|g| format!("\"{g}\"")).collect::<Vec<_>>().join(", ")
                ),
            ));
        }
    }
    for c in &request.components {
        if !seen.contains_key(c.id.as_str()) {
            out.push(GenericRule::ExactlyOneEnsemble.violation(
                step,
                format!("`{}` did not assign `{}` to any group", assignment.method, c.id),
            ));
        }
    }
    out
}

fn requests(spec: &ArchitectureSpec, s: &Snapshot, step: usize) -> Vec<(usize, AssignRequest)> {
    spec.assignments
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let components = s
                .components
                .iter()
                .filter(|(id, c)| a.admits(id, c))
                .map(|(id, c)| ComponentView {
                    id: id.clone(),
                    attrs: c.attrs.clone(),
                })
                .collect();
            (
                k,
                AssignRequest {
                    method: a.method.clone(),
                    step,
                    components,
                    beyond_control: s.beyond_control.clone(),
                    group_ids: spec.group_ids(a),
                },
            )
        })
        .collect()
}

pub fn host_violation(e: &HostError, step: usize) -> Violation {
    let rule = match e {
        HostError::Startup { .. } | HostError::UnknownBuiltin(_) | HostError::Spawn { .. } => GenericRule::CodeValidity,
        _ => GenericRule::RuntimeException,
    };
    rule.violation(step, e.to_string())
}

/// Runs one initial state to completion.
pub fn run(cfg: &RunConfig<'_>, am: &mut dyn AdaptationManager, state: &InitialState) -> Result<RunOutcome, RunError> {
    if cfg.spec.assignments.is_empty() {
        return Err(RunError::NoAssignments);
    }
    let mut scenario = cfg.scenario.init(state)?;
    let mut monitor = Monitor::new(cfg.constraints.to_vec(), cfg.spec.vocabulary(), Horizon::Unknown)?;
    let mut snapshots = vec![scenario.snapshot()];
    monitor.step(&snapshots[0])?;
    let mut generic = Vec::new();
    let mut stop = StopReason::Horizon;

    'steps: while scenario.step() < scenario.horizon() {
        if scenario.is_terminal() {
            stop = StopReason::Terminal;
            break;
        }
        let step = scenario.step() + 1;
        let before = snapshots.last().unwrap();
        let mut update = Update::new();
        for (k, request) in requests(cfg.spec, before, step) {
            let assignment = &cfg.spec.assignments[k];
            match am.invoke(&request) {
                Err(e) => generic.push(host_violation(&e, step)),
                Ok(AssignResponse::Error(f)) => {
                    let mut detail = format!("`{}` raised {}", request.method, f.message);
                    if !f.traceback.trim().is_empty() {
                        detail.push('\n');
                        detail.push_str(f.traceback.trim_end());
                    }
                    generic.push(GenericRule::RuntimeException.violation(step, detail));
                }
                Ok(AssignResponse::Assignments(pairs)) => {
                    generic.extend(check_response(cfg.spec, assignment, &request, &pairs, &mut update, step));
                }
            }
            if !generic.is_empty() {
                stop = StopReason::Generic;
                break 'steps;
            }
        }
        scenario.apply(&update)?;
        let s = scenario.snapshot();
        monitor.step(&s)?;
        snapshots.push(s);
    }
    if stop == StopReason::Horizon && scenario.is_terminal() {
        stop = StopReason::Terminal;
    }
    // a truncated run says nothing about obligations still open
    if stop != StopReason::Generic {
        monitor.finish()?;
    }
    let mut violations = generic;
    violations.extend(monitor.violations().iter().cloned());
    crate::online::sort_violations(&mut violations);
    let trace = Trace::new(snapshots).expect("runs record at least the initial snapshot");
    Ok(RunOutcome {
        report: RunReport {
            initial_state: state.name.clone(),
            seed: state.seed,
            steps: scenario.step(),
            stop,
            metrics: scenario.metrics(),
            violations,
        },
        notes: monitor.notes().to_vec(),
        trace,
    })
}

/// Opens a fresh AM per initial state and runs them all.
pub fn run_batch(
    cfg: &RunConfig<'_>,
    endpoint: &AmEndpoint,
    states: &[InitialState],
    mode: Exec,
) -> Result<ViolationReport, RunError> {
    let runs = exec::map(mode, states, |state| -> Result<RunReport, RunError> {
        match endpoint.open() {
            Ok(mut am) => Ok(run(cfg, am.as_mut(), state)?.report),
            Err(e) => Ok(RunReport {
                initial_state: state.name.clone(),
                seed: state.seed,
                steps: 0,
                stop: StopReason::Generic,
                metrics: Metrics::new(),
                violations: vec![host_violation(&e, 0)],
            }),
        }
    });
    Ok(ViolationReport {
        runs: runs.into_iter().collect::<Result<_, _>>()?,
    })
}
