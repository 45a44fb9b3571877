//! The generation loop: prompt, generate, materialize, verify, feed back.

mod backend;
mod experiment;
mod feedback;
mod prompt;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adsl::{ArchitectureSpec, InitialState};
use crate::amhost::materialize_generated_am;
use crate::exec::Exec;
use crate::fcl::Constraint;
use crate::runtime::{run_batch, GenericRule, RunConfig, RunError, RunReport, StopReason, ViolationReport};
use crate::scenarios::{Metrics, ScenarioKind};

pub use backend::{parse_chat_response, Backend, BackendError, HttpBackend, MockBackend};
pub use experiment::{histogram, read_table, render_histogram, run_experiment, write_table, Bucket, ExperimentRow};
pub use feedback::{format_feedback, metric_line, FeedbackMode};
pub use prompt::{
    generate_prompt, requirements_block, Message, PromptBundle, PromptError, Role, Variant, CLOSER, EXACTLY_ONE,
    SECTION_BREAK,
};

/// Everything about the system under design that a loop needs.
#[derive(Clone, Copy)]
pub struct LoopContext<'a> {
    pub scenario: ScenarioKind,
    pub spec: &'a ArchitectureSpec,
    pub constraints: &'a [Constraint],
    pub domain: &'a str,
    pub states: &'a [InitialState],
}

#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub mode: FeedbackMode,
    pub variant: Variant,
    pub max_iterations: usize,
    /// Drop the conversation history after a stagnation.
    pub fresh_start: bool,
    pub language: String,
    /// Generated AMs are written to `scratch/iter-NN`.
    pub scratch: PathBuf,
    pub retries: usize,
    pub backoff: Duration,
}

impl LoopConfig {
    pub fn new(mode: FeedbackMode, variant: Variant, scratch: impl Into<PathBuf>) -> Self {
        LoopConfig {
            mode,
            variant,
            max_iterations: 10,
            fresh_start: false,
            language: "Python".to_string(),
            scratch: scratch.into(),
            retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    MaxIterations,
    TransportFailure(String),
    Prompt(String),
    Verifier(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Messages in the conversation sent to the backend.
    pub messages_sent: usize,
    pub response_digest: String,
    pub code_blocks: usize,
    pub report: ViolationReport,
    pub feedback: String,
    /// The report equals the previous iteration's report.
    pub stagnant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopResult {
    pub iterations: usize,
    pub valid: bool,
    pub abort: Option<AbortReason>,
    pub stagnated: bool,
    pub records: Vec<IterationRecord>,
}

impl LoopResult {
    pub fn final_report(&self) -> Option<&ViolationReport> {
        self.records.last().map(|r| &r.report)
    }
}

pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// A report blaming the generated code itself, one run per initial state.
fn code_validity_report(states: &[InitialState], detail: &str) -> ViolationReport {
    ViolationReport {
        runs: states
            .iter()
            .map(|s| RunReport {
                initial_state: s.name.clone(),
                seed: s.seed,
                steps: 0,
                stop: StopReason::Generic,
                metrics: Metrics::new(),
                violations: vec![GenericRule::CodeValidity.violation(0, detail)],
            })
            .collect(),
    }
}

fn complete_with_retry(
    backend: &mut dyn Backend,
    messages: &[Message],
    cfg: &LoopConfig,
) -> Result<String, BackendError> {
    let mut delay = cfg.backoff;
    let mut attempt = 0;
    loop {
        match backend.complete(messages) {
            Err(e) if e.is_transient() && attempt < cfg.retries => {
                attempt += 1;
                std::thread::sleep(delay);
                delay *= 2;
            }
            other => return other,
        }
    }
}

fn verify(ctx: &LoopContext<'_>, response: &str, dir: PathBuf, language: &str) -> Result<(ViolationReport, usize), RunError> {
    match materialize_generated_am(response, &dir, ctx.spec, language) {
        Err(e) => Ok((code_validity_report(ctx.states, &e.to_string()), 0)),
        Ok(m) => {
            let cfg = RunConfig {
                scenario: ctx.scenario,
                spec: ctx.spec,
                constraints: ctx.constraints,
            };
            Ok((run_batch(&cfg, &m.endpoint, ctx.states, Exec::Sequential)?, m.blocks))
        }
    }
}

/// Runs the loop until an AM passes verification or the budget is spent.
pub fn run_loop(ctx: &LoopContext<'_>, backend: &mut dyn Backend, cfg: &LoopConfig) -> LoopResult {
    let mut result = LoopResult {
        iterations: 0,
        valid: false,
        abort: None,
        stagnated: false,
        records: Vec::new(),
    };
    let prompt = match generate_prompt(ctx.spec, ctx.domain, ctx.constraints, cfg.variant, &cfg.language) {
        Ok(p) => p,
        Err(e) => {
            result.abort = Some(AbortReason::Prompt(e.to_string()));
            return result;
        }
    };
    let mut conversation = prompt.messages.clone();
    for k in 1..=cfg.max_iterations {
        let response = match complete_with_retry(backend, &conversation, cfg) {
            Ok(r) => r,
            Err(e) => {
                result.abort = Some(AbortReason::TransportFailure(e.to_string()));
                return result;
            }
        };
        result.iterations = k;
        let dir = cfg.scratch.join(format!("iter-{k:02}"));
        let (report, blocks) = match verify(ctx, &response, dir, &cfg.language) {
            Ok(v) => v,
            Err(e) => {
                result.abort = Some(AbortReason::Verifier(e.to_string()));
                return result;
            }
        };
        let stagnant = result.records.last().is_some_and(|prev| prev.report == report);
        result.stagnated |= stagnant;
        let feedback = format_feedback(&report, cfg.mode);
        let valid = report.is_valid();
        result.records.push(IterationRecord {
            iteration: k,
            messages_sent: conversation.len(),
            response_digest: digest(&response),
            code_blocks: blocks,
            report,
            feedback: feedback.clone(),
            stagnant,
        });
        if valid {
            result.valid = true;
            return result;
        }
        if stagnant && cfg.fresh_start {
            conversation = prompt.messages.clone();
        } else {
            conversation.push(Message::new(Role::Assistant, response));
            conversation.push(Message::new(Role::User, feedback));
        }
    }
    result.abort = Some(AbortReason::MaxIterations);
    result
}
