//! Whole-trace evaluation. Slow and direct; the online monitor is checked
//! against it.

use std::collections::BTreeSet;

use super::bound::{decide, resolve_pair, WindowOutcome};
use super::eval::{lookup, Env, EvalError, Evaluator, StateCtx, Vocabulary, WithinHook};
use super::{Constraint, Formula, SetExpr, Trace, Value};

/// Quantifier binding: variable name to component id, outermost first.
pub type Binding = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witness {
    pub anchor: usize,
    pub binding: Binding,
    /// Rendering of the part of the constraint that failed.
    pub subformula: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    /// Ordered by anchor, then binding.
    pub violations: Vec<Witness>,
    /// Windows cut short because a bound component left the system.
    pub cancelled: Vec<Witness>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn earliest(&self) -> Option<&Witness> {
        self.violations.first()
    }
}

/// Splits the leading universal prefix off a formula.
pub fn split_prefix(f: &Formula) -> (Vec<(&str, &SetExpr)>, &Formula) {
    let mut prefix = Vec::new();
    let mut cur = f;
    while let Formula::Forall(v, s, body) = cur {
        prefix.push((v.as_str(), s));
        cur = body;
    }
    (prefix, cur)
}

/// Top-level `within` constraints are eventualities: each binding is anchored
/// once, at the first step it exists. Everything else is an invariant
/// checked at every step.
pub fn is_eventuality(f: &Formula) -> bool {
    matches!(split_prefix(f).1, Formula::Within { .. })
}

pub(crate) fn binding_of(prefix: &[(&str, &SetExpr)], env: &Env) -> Binding {
    prefix
        .iter()
        .zip(env.iter())
        .map(|((v, _), (_, val))| {
            let id = match val {
                Value::Comp(id) => id.clone(),
                other => other.to_string(),
            };
            (v.to_string(), id)
        })
        .collect()
}

/// All environments produced by materializing the prefix domains in order.
pub(crate) fn materialize<H: WithinHook + ?Sized>(
    ev: &mut Evaluator<'_, '_, H>,
    prefix: &[(&str, &SetExpr)],
) -> Result<Vec<Env>, EvalError> {
    let mut out = Vec::new();
    let mut env = Env::new();
    expand(ev, prefix, &mut env, &mut out)?;
    Ok(out)
}

fn expand<H: WithinHook + ?Sized>(
    ev: &mut Evaluator<'_, '_, H>,
    prefix: &[(&str, &SetExpr)],
    env: &mut Env,
    out: &mut Vec<Env>,
) -> Result<(), EvalError> {
    let Some(((var, set), rest)) = prefix.split_first() else {
        out.push(env.clone());
        return Ok(());
    };
    let domain = ev.set(set, env)?;
    for id in domain.iter() {
        env.push((var.to_string(), Value::Comp(id.to_string())));
        let r = expand(ev, rest, env, out);
        env.pop();
        r?;
    }
    Ok(())
}

/// Component ids the body of a `within` is about.
pub(crate) fn bound_components(body: &Formula, env: &Env) -> Vec<String> {
    body.free_vars()
        .iter()
        .filter_map(|v| match lookup(env, v) {
            Some(Value::Comp(id)) => Some(id.clone()),
            _ => None,
        })
        .collect()
}

struct OfflineHook<'t> {
    trace: &'t Trace,
    lets: &'t [(String, SetExpr)],
    vocab: &'t Vocabulary,
    cancelled: Vec<(usize, String)>,
}

impl OfflineHook<'_> {
    fn body_at(&mut self, position: usize, body: &Formula, env: &Env) -> Result<bool, EvalError> {
        let trace = self.trace;
        let ctx = StateCtx {
            snapshot: trace.get(position),
            position,
            trace_len: Some(trace.len()),
            lets: self.lets,
            vocab: self.vocab,
        };
        let mut env = env.clone();
        Evaluator::new(ctx, self).formula(body, &mut env)
    }
}

impl WithinHook for OfflineHook<'_> {
    fn within(&mut self, ctx: &StateCtx<'_>, node: &Formula, env: &Env) -> Result<bool, EvalError> {
        let Formula::Within { n, t, body } = node else {
            unreachable!("hook called on a non-temporal node")
        };
        let i = ctx.position;
        let len = self.trace.len();
        let r = resolve_pair(n, t, i, len).map_err(|e| EvalError::Bound {
            detail: e.to_string(),
            step: i,
        })?;
        let ids = bound_components(body, env);
        let present = |p: usize| {
            let s = self.trace.get(p);
            ids.iter().all(|id| s.components.contains_key(id))
        };
        if r.window >= 0 {
            if r.count == 0 || r.impossible() {
                return Ok(decide(r, 0, 0, false) == WindowOutcome::Satisfied);
            }
            let last = (i as u64 + r.width()).min(len as u64 - 1) as usize;
            let (mut trues, mut falses, mut cut) = (0u64, 0u64, false);
            for p in i + 1..=last {
                if !present(p) {
                    cut = true;
                    break;
                }
                if self.body_at(p, body, env)? {
                    trues += 1;
                } else {
                    falses += 1;
                }
                if trues >= r.count || falses > r.width() - r.count {
                    break;
                }
            }
            match decide(r, trues, falses, cut) {
                WindowOutcome::Satisfied => Ok(true),
                WindowOutcome::Violated => Ok(false),
                WindowOutcome::Cancelled => {
                    self.cancelled.push((i, node.to_string()));
                    Ok(true)
                }
            }
        } else {
            if r.impossible() {
                return Ok(false);
            }
            let first = i.saturating_sub(r.width() as usize);
            let mut trues = 0u64;
            for p in first..i {
                if present(p) && self.body_at(p, body, env)? {
                    trues += 1;
                }
            }
            Ok(trues >= r.count)
        }
    }
}

fn failing_part(matrix: &Formula) -> &Formula {
    match matrix {
        Formula::Implies(_, b) => b,
        other => other,
    }
}

/// Evaluates a constraint over a complete trace, returning every witness.
pub fn eval_offline(c: &Constraint, trace: &Trace, vocab: &Vocabulary) -> Result<Verdict, EvalError> {
    let (prefix, matrix) = split_prefix(&c.body);
    let eventual = matches!(matrix, Formula::Within { .. });
    let mut hook = OfflineHook {
        trace,
        lets: &c.lets,
        vocab,
        cancelled: Vec::new(),
    };
    let mut verdict = Verdict::default();
    let mut anchored: BTreeSet<Binding> = BTreeSet::new();
    let subformula = failing_part(matrix).to_string();
    let positions = if eventual && prefix.is_empty() { 1 } else { trace.len() };
    for i in 0..positions {
        let ctx = StateCtx {
            snapshot: trace.get(i),
            position: i,
            trace_len: Some(trace.len()),
            lets: &c.lets,
            vocab,
        };
        let envs = materialize(&mut Evaluator::new(ctx, &mut hook), &prefix)?;
        let mut fresh = Vec::new();
        for mut env in envs {
            let binding = binding_of(&prefix, &env);
            if eventual && anchored.contains(&binding) {
                continue;
            }
            let ok = Evaluator::new(ctx, &mut hook).formula(matrix, &mut env)?;
            if !ok {
                verdict.violations.push(Witness {
                    anchor: i,
                    binding: binding.clone(),
                    subformula: subformula.clone(),
                });
            }
            for (_, sub) in hook.cancelled.drain(..) {
                verdict.cancelled.push(Witness {
                    anchor: i,
                    binding: binding.clone(),
                    subformula: sub,
                });
            }
            fresh.push(binding);
        }
        if eventual {
            anchored.extend(fresh);
        }
    }
    verdict.violations.sort();
    verdict.cancelled.sort();
    Ok(verdict)
}

/// LTL operators expressible with a single `within`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtlOp {
    Next,
    Future,
    Globally,
}

pub fn ltl_bridge(op: LtlOp, phi: Formula) -> Formula {
    use super::Bound;
    match op {
        LtlOp::Next => Formula::within(Bound::Lit(1), Bound::Lit(1), phi),
        LtlOp::Future => Formula::within(Bound::Lit(1), Bound::Inf, phi),
        LtlOp::Globally => Formula::within(Bound::Inf, Bound::Inf, phi),
    }
}
