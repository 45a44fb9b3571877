use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use super::classify::{classify, static_bound, Shape, SubsetError};
use super::history::HistoryBuffer;
use super::report::{binding_text, sort_violations, Counts, Note, Violation, ViolationKind};
use crate::fcl::bound::{decide, resolve_bound, resolve_pair, BoundRole, Resolved, WindowOutcome};
use crate::fcl::eval::{Env, EvalError, Evaluator, NoTemporal, StateCtx, Vocabulary, WithinHook};
use crate::fcl::names::{check_names, NameError};
use crate::fcl::offline::{binding_of, bound_components, materialize, split_prefix};
use crate::fcl::{Binding, Bound, Constraint, Formula, Snapshot};

/// What the monitor knows about the run length in advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Known(usize),
    /// MAX-dependent parts are settled by `finish`.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("constraint {index} (\"{description}\"): {kind}")]
pub struct LoadError {
    pub index: usize,
    pub description: String,
    pub kind: LoadErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadErrorKind {
    #[error(transparent)]
    Subset(#[from] SubsetError),
    #[error(transparent)]
    Names(#[from] NameError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("expected step {expected}, got step {found}")]
    OutOfOrder { expected: usize, found: usize },
    #[error("run announced {expected} steps but {observed} were observed")]
    HorizonMismatch { expected: usize, observed: usize },
    #[error("no snapshot was observed")]
    EmptyRun,
    #[error("monitor already finished")]
    Finished,
    #[error("constraint \"{constraint}\": {source}")]
    Eval {
        constraint: String,
        #[source]
        source: EvalError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObligationStatus {
    Pending,
    Satisfied,
    Violated,
    Cancelled,
}

impl From<WindowOutcome> for ObligationStatus {
    fn from(o: WindowOutcome) -> Self {
        match o {
            WindowOutcome::Satisfied => ObligationStatus::Satisfied,
            WindowOutcome::Violated => ObligationStatus::Violated,
            WindowOutcome::Cancelled => ObligationStatus::Cancelled,
        }
    }
}

struct Forward {
    n: Bound,
    t: Bound,
    body: Formula,
    /// Rendered once for violation details.
    text: (String, String, String),
}

struct Backward {
    n: Bound,
    t: Bound,
    body: Formula,
}

struct Loaded {
    constraint: Constraint,
    shape: Shape,
    histories: Vec<HistoryBuffer>,
    anchored: BTreeSet<Binding>,
    backward: Vec<Backward>,
    /// The forward within of eventual and triggered shapes.
    forward: Option<Forward>,
    /// The checked part of the matrix, rendered for violation details.
    matrix_text: String,
}

impl Loaded {
    fn new(constraint: Constraint, shape: Shape) -> Self {
        let backward: Vec<Backward> = backward_nodes(&constraint.body)
            .into_iter()
            .map(|node| match node {
                Formula::Within { n, t, body } => Backward {
                    n: *n,
                    t: *t,
                    body: (**body).clone(),
                },
                _ => unreachable!(),
            })
            .collect();
        let histories = backward.iter().map(|b| HistoryBuffer::new(history_capacity(&b.t))).collect();
        let forward = match shape {
            Shape::Invariant => None,
            Shape::Eventual | Shape::Triggered => {
                let (_, matrix) = split_prefix(&constraint.body);
                let w = match matrix {
                    Formula::Implies(_, b) => b.as_ref(),
                    other => other,
                };
                match w {
                    Formula::Within { n, t, body } => Some(Forward {
                        n: *n,
                        t: *t,
                        body: (**body).clone(),
                        text: (n.to_string(), t.to_string(), body.to_string()),
                    }),
                    _ => unreachable!("shape was classified as temporal"),
                }
            }
        };
        let matrix_text = match split_prefix(&constraint.body).1 {
            Formula::Implies(_, b) => b.to_string(),
            other => other.to_string(),
        };
        Loaded {
            constraint,
            shape,
            histories,
            anchored: BTreeSet::new(),
            backward,
            forward,
            matrix_text,
        }
    }

    fn forward(&self) -> &Forward {
        self.forward.as_ref().expect("shape was classified as temporal")
    }

    fn antecedent(&self) -> &Formula {
        match split_prefix(&self.constraint.body).1 {
            Formula::Implies(a, _) => a,
            _ => unreachable!("triggered shape has an implication"),
        }
    }

    fn slot_hook(&self, values: &[bool]) -> SlotHook<'_> {
        SlotHook {
            slots: self.backward.iter().map(|b| &b.body).zip(values.iter().copied()).collect(),
        }
    }
}

fn backward_nodes(f: &Formula) -> Vec<&Formula> {
    let mut out = Vec::new();
    f.visit(&mut |node| {
        if matches!(node, Formula::Within { t, .. } if !t.is_forward()) {
            out.push(node);
        }
    });
    out
}

/// Answers backward windows from values computed before evaluation. Slots
/// are keyed by window body; backward bodies are closed, so equal windows
/// have equal values.
struct SlotHook<'p> {
    slots: Vec<(&'p Formula, bool)>,
}

impl WithinHook for SlotHook<'_> {
    fn within(&mut self, ctx: &StateCtx<'_>, node: &Formula, _: &Env) -> Result<bool, EvalError> {
        let Formula::Within { body, .. } = node else {
            return Err(EvalError::TemporalInStateFormula { step: ctx.position });
        };
        self.slots
            .iter()
            .find(|(f, _)| *f == body.as_ref())
            .map(|(_, v)| *v)
            .ok_or(EvalError::TemporalInStateFormula { step: ctx.position })
    }
}

#[derive(Debug, Clone)]
enum Window {
    Resolved(Resolved),
    Lazy,
}

#[derive(Debug, Clone)]
struct Obligation {
    constraint: usize,
    anchor: usize,
    binding: Binding,
    env: Env,
    ids: Vec<String>,
    window: Window,
    trues: u64,
    falses: u64,
    cut: bool,
    observing: bool,
    /// Per-step results, kept when the window end depends on the run length.
    record: Option<Vec<bool>>,
    gate: Option<usize>,
    status: ObligationStatus,
}

#[derive(Debug, Clone)]
struct Deferred {
    id: usize,
    constraint: usize,
    anchor: usize,
    binding: Binding,
    env: Env,
    snapshot: Arc<Snapshot>,
    slots: Vec<bool>,
}

pub struct Monitor {
    loaded: Vec<Loaded>,
    vocab: Vocabulary,
    horizon: Horizon,
    next_step: usize,
    obligations: Vec<Obligation>,
    /// Gated obligations that resolved before their gate did.
    parked: Vec<Obligation>,
    deferred: Vec<Deferred>,
    violations: Vec<Violation>,
    notes: Vec<Note>,
    finished: bool,
}

fn history_capacity(t: &Bound) -> Option<usize> {
    match t {
        Bound::Lit(k) => Some(k.unsigned_abs() as usize),
        _ => None,
    }
}

impl Monitor {
    pub fn new(
        constraints: Vec<Constraint>,
        vocab: Vocabulary,
        horizon: Horizon,
    ) -> Result<Monitor, LoadError> {
        let mut loaded = Vec::with_capacity(constraints.len());
        for (index, constraint) in constraints.into_iter().enumerate() {
            let fail = |kind: LoadErrorKind| LoadError {
                index,
                description: constraint.description.clone(),
                kind,
            };
            check_names(&constraint, &vocab).map_err(|e| fail(e.into()))?;
            let shape = classify(&constraint).map_err(|e| fail(e.into()))?;
            loaded.push(Loaded::new(constraint, shape));
        }
        Ok(Monitor {
            loaded,
            vocab,
            horizon,
            next_step: 0,
            obligations: Vec::new(),
            parked: Vec::new(),
            deferred: Vec::new(),
            violations: Vec::new(),
            notes: Vec::new(),
            finished: false,
        })
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.loaded.iter().map(|l| &l.constraint)
    }

    /// Every violation finalized so far, ordered by step, then constraint.
    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn notes(&self) -> &[Note] {
        &self.notes
    }

    pub fn pending(&self) -> usize {
        self.obligations.len()
    }

    /// Status of every live or parked obligation, for inspection.
    pub fn obligation_states(&self) -> Vec<(usize, usize, Binding, ObligationStatus, u64, u64)> {
        self.obligations
            .iter()
            .chain(&self.parked)
            .map(|o| (o.constraint, o.anchor, o.binding.clone(), o.status, o.trues, o.falses))
            .collect()
    }

    fn known_len(&self) -> Option<usize> {
        match self.horizon {
            Horizon::Known(len) => Some(len),
            Horizon::Unknown => None,
        }
    }

    fn eval_err(&self, constraint: usize, source: EvalError) -> MonitorError {
        MonitorError::Eval {
            constraint: self.loaded[constraint].constraint.description.clone(),
            source,
        }
    }

    /// Feeds the next snapshot; returns violations finalized by it.
    pub fn step(&mut self, s: &Snapshot) -> Result<Vec<Violation>, MonitorError> {
        if self.finished {
            return Err(MonitorError::Finished);
        }
        if s.step != self.next_step {
            return Err(MonitorError::OutOfOrder {
                expected: self.next_step,
                found: s.step,
            });
        }
        if let Some(len) = self.known_len() {
            if s.step >= len {
                return Err(MonitorError::HorizonMismatch {
                    expected: len,
                    observed: s.step + 1,
                });
            }
        }
        let mut fresh = Vec::new();

        // existing obligations observe this step
        let live = std::mem::take(&mut self.obligations);
        for mut ob in live {
            self.observe(&mut ob, s)?;
            self.route(ob, &mut fresh);
        }

        let mut shared: Option<Arc<Snapshot>> = None;
        for k in 0..self.loaded.len() {
            self.anchor_constraint(k, s, &mut shared, &mut fresh)?;
            self.push_history(k, s)?;
        }

        self.next_step += 1;
        if !fresh.is_empty() {
            sort_violations(&mut fresh);
            self.violations.extend(fresh.iter().cloned());
            sort_violations(&mut self.violations);
        }
        Ok(fresh)
    }

    fn slot_values(&self, k: usize, i: usize) -> Vec<bool> {
        let l = &self.loaded[k];
        l.backward
            .iter()
            .zip(&l.histories)
            .map(|(b, history)| {
                let Ok(r) = resolve_pair(&b.n, &b.t, i, i + 1) else {
                    return false;
                };
                if r.impossible() {
                    return false;
                }
                let first = i - (r.width() as usize).min(i);
                history.trues(first, i) >= r.count
            })
            .collect()
    }

    fn push_history(&mut self, k: usize, s: &Snapshot) -> Result<(), MonitorError> {
        let len = self.known_len();
        let mut values = Vec::new();
        {
            let l = &self.loaded[k];
            for b in &l.backward {
                let ctx = StateCtx {
                    snapshot: s,
                    position: s.step,
                    trace_len: len,
                    lets: &l.constraint.lets,
                    vocab: &self.vocab,
                };
                let v = Evaluator::new(ctx, &mut NoTemporal)
                    .formula(&b.body, &mut Env::new())
                    .map_err(|e| self.eval_err(k, e))?;
                values.push(v);
            }
        }
        for (h, v) in self.loaded[k].histories.iter_mut().zip(values) {
            h.push(v);
        }
        Ok(())
    }

    fn anchor_constraint(
        &mut self,
        k: usize,
        s: &Snapshot,
        shared: &mut Option<Arc<Snapshot>>,
        fresh: &mut Vec<Violation>,
    ) -> Result<(), MonitorError> {
        let i = s.step;
        let len = self.known_len();
        let slots = self.slot_values(k, i);
        let l = &self.loaded[k];
        let (prefix, matrix) = split_prefix(&l.constraint.body);
        if l.shape == Shape::Eventual && prefix.is_empty() && i > 0 {
            return Ok(());
        }
        let mut hook = l.slot_hook(&slots);
        let ctx = StateCtx {
            snapshot: s,
            position: i,
            trace_len: len,
            lets: &l.constraint.lets,
            vocab: &self.vocab,
        };
        let mut ev = Evaluator::new(ctx, &mut hook);
        let envs = materialize(&mut ev, &prefix).map_err(|e| self.eval_err(k, e))?;

        let mut spawn: Vec<(Binding, Env, Option<usize>)> = Vec::new();
        let mut defer: Vec<(Binding, Env)> = Vec::new();
        let mut failed: Vec<Binding> = Vec::new();
        for mut env in envs {
            let binding = binding_of(&prefix, &env);
            match l.shape {
                Shape::Eventual => {
                    if !l.anchored.contains(&binding) {
                        spawn.push((binding, env, None));
                    }
                }
                Shape::Triggered => match ev.formula(l.antecedent(), &mut env) {
                    Ok(true) => spawn.push((binding, env, None)),
                    Ok(false) => {}
                    Err(e) if e.needs_trace_length() => defer.push((binding, env)),
                    Err(e) => return Err(self.eval_err(k, e)),
                },
                Shape::Invariant => match ev.formula(matrix, &mut env) {
                    Ok(true) => {}
                    Ok(false) => failed.push(binding),
                    Err(e) if e.needs_trace_length() => defer.push((binding, env)),
                    Err(e) => return Err(self.eval_err(k, e)),
                },
            }
        }
        drop(ev);
        let shape = l.shape;
        let subformula = &l.matrix_text;

        for binding in failed {
            fresh.push(Violation {
                kind: ViolationKind::Functional,
                constraint: l.constraint.description.clone(),
                constraint_index: Some(k),
                step: i,
                detail: if binding.is_empty() {
                    format!("`{subformula}` is false at step {i}")
                } else {
                    format!("`{subformula}` is false at step {i} for {}", binding_text(&binding))
                },
                binding,
                subformula: Some(subformula.clone()),
                counts: None,
            });
        }
        for (binding, env) in defer {
            let id = self.deferred.len();
            let snapshot = shared.get_or_insert_with(|| Arc::new(s.clone())).clone();
            if shape == Shape::Triggered {
                spawn.push((binding.clone(), env.clone(), Some(id)));
            }
            self.deferred.push(Deferred {
                id,
                constraint: k,
                anchor: i,
                binding,
                env,
                snapshot,
                slots: slots.clone(),
            });
        }
        for (binding, env, gate) in spawn {
            if shape == Shape::Eventual {
                self.loaded[k].anchored.insert(binding.clone());
            }
            let ob = self.spawn(k, i, binding, env, gate);
            self.route(ob, fresh);
        }
        Ok(())
    }

    fn spawn(&self, k: usize, i: usize, binding: Binding, env: Env, gate: Option<usize>) -> Obligation {
        let Forward { n, t, body, .. } = self.loaded[k].forward();
        let ids = bound_components(body, &env);
        let mut ob = Obligation {
            constraint: k,
            anchor: i,
            binding,
            env,
            ids,
            window: Window::Lazy,
            trues: 0,
            falses: 0,
            cut: false,
            observing: true,
            record: None,
            gate,
            status: ObligationStatus::Pending,
        };
        match self.horizon {
            Horizon::Known(len) => {
                // bounds were checked at load
                let r = resolve_pair(n, t, i, len).expect("bounds checked at load");
                ob.window = Window::Resolved(r);
                if r.count == 0 || r.impossible() {
                    ob.status = decide(r, 0, 0, false).into();
                }
            }
            Horizon::Unknown => {
                if matches!(t, Bound::Scaled { .. }) {
                    ob.record = Some(Vec::new());
                }
                if let Some(need) = static_count(n, t, i) {
                    if need == 0 {
                        ob.status = ObligationStatus::Satisfied;
                    } else if matches!(t, Bound::Lit(cap) if need > *cap as u64) {
                        ob.status = ObligationStatus::Violated;
                    }
                }
            }
        }
        ob
    }

    fn observe(&self, ob: &mut Obligation, s: &Snapshot) -> Result<(), MonitorError> {
        if ob.status != ObligationStatus::Pending || !ob.observing {
            return Ok(());
        }
        let p = s.step;
        let l = &self.loaded[ob.constraint];
        let Forward { n, t, body, .. } = l.forward();
        if !ob.ids.iter().all(|id| s.components.contains_key(id)) {
            ob.cut = true;
            ob.observing = false;
            if let Window::Resolved(r) = ob.window {
                ob.status = decide(r, ob.trues, ob.falses, true).into();
            }
            return Ok(());
        }
        let ctx = StateCtx {
            snapshot: s,
            position: p,
            trace_len: self.known_len(),
            lets: &l.constraint.lets,
            vocab: &self.vocab,
        };
        let mut env = ob.env.clone();
        let value = Evaluator::new(ctx, &mut NoTemporal)
            .formula(body, &mut env)
            .map_err(|e| self.eval_err(ob.constraint, e))?;
        if value {
            ob.trues += 1;
        } else {
            ob.falses += 1;
        }
        if let Some(record) = &mut ob.record {
            record.push(value);
        }
        let offset = (p - ob.anchor) as u64;
        match ob.window {
            Window::Resolved(r) => {
                let last = match self.horizon {
                    Horizon::Known(len) => (ob.anchor as u64 + r.width()).min(len as u64 - 1),
                    Horizon::Unknown => unreachable!(),
                };
                if ob.trues >= r.count || ob.falses > r.width() - r.count || p as u64 == last {
                    ob.status = decide(r, ob.trues, ob.falses, false).into();
                }
            }
            Window::Lazy => {
                let need = static_count(n, t, ob.anchor);
                let scaled_window = matches!(t, Bound::Scaled { .. });
                if let Some(need) = need {
                    if !scaled_window && ob.trues >= need {
                        ob.status = ObligationStatus::Satisfied;
                    }
                    if let Bound::Lit(cap) = t {
                        if ob.falses > (*cap as u64).saturating_sub(need) {
                            ob.status = ObligationStatus::Violated;
                        }
                    }
                }
                let always = matches!(n, Bound::Max | Bound::Inf) && matches!(t, Bound::Max | Bound::Inf);
                if always && ob.falses > 0 {
                    ob.status = ObligationStatus::Violated;
                }
                if let Bound::Lit(cap) = t {
                    if offset >= *cap as u64 {
                        ob.observing = false;
                    }
                }
            }
        }
        Ok(())
    }

    /// Keeps pending obligations, parks resolved gated ones, and emits the rest.
    fn route(&mut self, ob: Obligation, out: &mut Vec<Violation>) {
        if ob.status == ObligationStatus::Pending {
            self.obligations.push(ob);
        } else if ob.gate.is_some() {
            self.parked.push(ob);
        } else {
            self.emit(&ob, out);
        }
    }

    fn emit(&mut self, ob: &Obligation, out: &mut Vec<Violation>) {
        let l = &self.loaded[ob.constraint];
        let (n, t, body) = &l.forward().text;
        let who = if ob.binding.is_empty() {
            String::new()
        } else {
            format!(" for {}", binding_text(&ob.binding))
        };
        match ob.status {
            ObligationStatus::Violated => {
                let r = match ob.window {
                    Window::Resolved(r) => Some(r),
                    Window::Lazy => None,
                };
                let detail = match r {
                    Some(r) => format!(
                        "`{body}` had to hold at least {} times in the {} steps after step {}{who}; \
                         it held {} times and failed {} times",
                        r.count,
                        r.width(),
                        ob.anchor,
                        ob.trues,
                        ob.falses
                    ),
                    None => format!(
                        "`{body}` had to hold at least {n} times within {t} steps after step {}{who}; \
                         it held {} times and failed {} times",
                        ob.anchor, ob.trues, ob.falses
                    ),
                };
                out.push(Violation {
                    kind: ViolationKind::Functional,
                    constraint: l.constraint.description.clone(),
                    constraint_index: Some(ob.constraint),
                    step: ob.anchor,
                    binding: ob.binding.clone(),
                    detail,
                    subformula: Some(format!("within[{n}, {t}] {body}")),
                    counts: r.map(|r| Counts {
                        trues: ob.trues,
                        falses: ob.falses,
                        required: r.count,
                        window: r.window,
                    }),
                });
            }
            ObligationStatus::Cancelled => {
                let note = Note {
                    constraint: l.constraint.description.clone(),
                    constraint_index: ob.constraint,
                    step: ob.anchor,
                    binding: ob.binding.clone(),
                    detail: format!(
                        "window opened at step {}{who} was cancelled because a component left the system",
                        ob.anchor
                    ),
                };
                self.notes.push(note);
            }
            ObligationStatus::Satisfied | ObligationStatus::Pending => {}
        }
    }

    /// Resolves everything still open. The run length is the number of
    /// snapshots observed.
    pub fn finish(&mut self) -> Result<Vec<Violation>, MonitorError> {
        if self.finished {
            return Err(MonitorError::Finished);
        }
        if self.next_step == 0 {
            return Err(MonitorError::EmptyRun);
        }
        let len = self.next_step;
        if let Some(expected) = self.known_len() {
            if expected != len {
                return Err(MonitorError::HorizonMismatch {
                    expected,
                    observed: len,
                });
            }
        }
        self.finished = true;
        let mut fresh = Vec::new();

        // gates first: they decide which tentative obligations count
        let mut open_gates = BTreeSet::new();
        let deferred = std::mem::take(&mut self.deferred);
        for d in &deferred {
            let l = &self.loaded[d.constraint];
            let (_, matrix) = split_prefix(&l.constraint.body);
            let target = match l.shape {
                Shape::Triggered => l.antecedent(),
                _ => matrix,
            };
            let mut hook = l.slot_hook(&d.slots);
            let ctx = StateCtx {
                snapshot: &d.snapshot,
                position: d.anchor,
                trace_len: Some(len),
                lets: &l.constraint.lets,
                vocab: &self.vocab,
            };
            let mut env = d.env.clone();
            let value = Evaluator::new(ctx, &mut hook)
                .formula(target, &mut env)
                .map_err(|e| self.eval_err(d.constraint, e))?;
            match l.shape {
                Shape::Triggered => {
                    if value {
                        open_gates.insert(d.id);
                    }
                }
                _ if !value => {
                    let subformula = l.matrix_text.clone();
                    let who = if d.binding.is_empty() {
                        String::new()
                    } else {
                        format!(" for {}", binding_text(&d.binding))
                    };
                    fresh.push(Violation {
                        kind: ViolationKind::Functional,
                        constraint: l.constraint.description.clone(),
                        constraint_index: Some(d.constraint),
                        step: d.anchor,
                        binding: d.binding.clone(),
                        detail: format!("`{subformula}` is false at step {}{who}", d.anchor),
                        subformula: Some(subformula),
                        counts: None,
                    });
                }
                _ => {}
            }
        }

        let live = std::mem::take(&mut self.obligations);
        let parked = std::mem::take(&mut self.parked);
        for mut ob in live.into_iter().chain(parked) {
            if let Some(g) = ob.gate {
                if !open_gates.contains(&g) {
                    continue;
                }
                ob.gate = None;
            }
            if ob.status == ObligationStatus::Pending {
                self.settle_at_end(&mut ob, len);
            }
            self.emit(&ob, &mut fresh);
        }

        sort_violations(&mut fresh);
        self.violations.extend(fresh.iter().cloned());
        sort_violations(&mut self.violations);
        self.notes
            .sort_by(|a, b| (a.step, a.constraint_index, &a.binding).cmp(&(b.step, b.constraint_index, &b.binding)));
        Ok(fresh)
    }

    fn settle_at_end(&self, ob: &mut Obligation, len: usize) {
        let Forward { n, t, .. } = self.loaded[ob.constraint].forward();
        let r = match ob.window {
            Window::Resolved(r) => r,
            Window::Lazy => {
                let r = resolve_pair(n, t, ob.anchor, len).expect("bounds checked at load");
                ob.window = Window::Resolved(r);
                r
            }
        };
        let mut cut = ob.cut;
        if let Some(record) = &ob.record {
            let w = (r.width() as usize).min(record.len());
            ob.trues = record[..w].iter().filter(|v| **v).count() as u64;
            ob.falses = w as u64 - ob.trues;
            cut = ob.cut && record.len() < r.width() as usize;
        }
        ob.status = decide(r, ob.trues, ob.falses, cut).into();
    }
}

/// Resolved count when it does not depend on the run length.
fn static_count(n: &Bound, t: &Bound, anchor: usize) -> Option<u64> {
    if !static_bound(n) {
        return None;
    }
    resolve_bound(n, anchor, anchor + 1, BoundRole::Count { window: t })
        .ok()
        .map(|v| v as u64)
}
