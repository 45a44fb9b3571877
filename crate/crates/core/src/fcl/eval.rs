//! Single-snapshot evaluation of formulas, expressions and sets.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use thiserror::Error;

use super::{ArithOp, CmpOp, Endcount, Expr, Formula, SetExpr, Snapshot, Trace, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("step {step}: unbound variable `{name}`")]
    UnboundVariable { name: String, step: usize },
    #[error("step {step}: unknown set `{name}`")]
    UnknownSet { name: String, step: usize },
    #[error("step {step}: component `{component}` has no attribute `{attribute}`")]
    UnknownAttribute {
        component: String,
        attribute: String,
        step: usize,
    },
    #[error("step {step}: unknown component `{component}`")]
    UnknownComponent { component: String, step: usize },
    #[error("step {step}: type mismatch: {detail}")]
    TypeMismatch { detail: String, step: usize },
    #[error("step {step}: temporal operator inside a state formula")]
    TemporalInStateFormula { step: usize },
    #[error("step {step}: MAX cannot be evaluated before the trace length is known")]
    NeedsTraceLength { step: usize },
    #[error("step {step}: invalid bound: {detail}")]
    Bound { detail: String, step: usize },
    #[error("let `{name}` failed to materialize: {source}")]
    LetFailed {
        name: String,
        #[source]
        source: Box<EvalError>,
    },
}

impl EvalError {
    pub fn needs_trace_length(&self) -> bool {
        match self {
            EvalError::NeedsTraceLength { .. } => true,
            EvalError::LetFailed { source, .. } => source.needs_trace_length(),
            _ => false,
        }
    }
}

/// Where a named set draws its members from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetSource {
    Ensemble(String),
    ComponentType(String),
}

/// Set names a constraint may refer to: ensembles and component-type sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    names: BTreeMap<String, SetSource>,
}

/// Name of the set holding every component of a type (`Villager` -> `Villagers`).
pub fn type_set_name(kind: &str) -> String {
    format!("{kind}s")
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_ensemble(mut self, id: impl Into<String>) -> Self {
        self.add_ensemble(id);
        self
    }

    pub fn with_component_type(mut self, kind: impl Into<String>) -> Self {
        self.add_component_type(kind);
        self
    }

    pub fn add_ensemble(&mut self, id: impl Into<String>) {
        let id = id.into();
        self.names.insert(id.clone(), SetSource::Ensemble(id));
    }

    pub fn add_component_type(&mut self, kind: impl Into<String>) {
        let kind = kind.into();
        self.names
            .insert(type_set_name(&kind), SetSource::ComponentType(kind));
    }

    pub fn resolve(&self, name: &str) -> Option<&SetSource> {
        self.names.get(name)
    }

    pub fn ensembles(&self) -> impl Iterator<Item = &str> {
        self.names.values().filter_map(|s| match s {
            SetSource::Ensemble(id) => Some(id.as_str()),
            SetSource::ComponentType(_) => None,
        })
    }

    /// Every ensemble and component type that appears anywhere in the trace.
    pub fn infer(trace: &Trace) -> Self {
        let mut vocab = Vocabulary::new();
        for s in trace.snapshots() {
            for id in s.ensembles.keys() {
                vocab.add_ensemble(id.clone());
            }
            for c in s.components.values() {
                vocab.add_component_type(c.kind.clone());
            }
        }
        vocab
    }

    pub fn merge(&mut self, other: &Vocabulary) {
        for (k, v) in &other.names {
            self.names.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }
}

/// Variable bindings, innermost last.
pub type Env = Vec<(String, Value)>;

pub fn lookup<'e>(env: &'e Env, name: &str) -> Option<&'e Value> {
    env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
}

/// Everything needed to evaluate at one trace position.
#[derive(Clone, Copy)]
pub struct StateCtx<'a> {
    pub snapshot: &'a Snapshot,
    pub position: usize,
    /// Known trace length; `None` while monitoring an open-ended run.
    pub trace_len: Option<usize>,
    pub lets: &'a [(String, SetExpr)],
    pub vocab: &'a Vocabulary,
}

/// Evaluates `within` nodes met during state evaluation.
pub trait WithinHook {
    fn within(&mut self, ctx: &StateCtx<'_>, node: &Formula, env: &Env) -> Result<bool, EvalError>;
}

/// Rejects every temporal operator.
pub struct NoTemporal;

impl WithinHook for NoTemporal {
    fn within(&mut self, ctx: &StateCtx<'_>, _: &Formula, _: &Env) -> Result<bool, EvalError> {
        Err(EvalError::TemporalInStateFormula { step: ctx.position })
    }
}

/// Component ids, sorted and without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdSet<'a>(Vec<&'a str>);

impl<'a> IdSet<'a> {
    pub fn new() -> Self {
        IdSet(Vec::new())
    }

    /// Wraps ids that are already sorted and distinct.
    fn from_sorted(ids: Vec<&'a str>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        IdSet(ids)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, &'a str> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn intersection(&self, other: &IdSet<'a>) -> IdSet<'a> {
        let (mut i, mut j, mut out) = (0, 0, Vec::new());
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        IdSet(out)
    }

    pub fn union(&self, other: &IdSet<'a>) -> IdSet<'a> {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        IdSet(out)
    }
}

impl<'a> FromIterator<&'a str> for IdSet<'a> {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut ids: Vec<&'a str> = iter.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        IdSet(ids)
    }
}

pub struct Evaluator<'a, 'h, H: WithinHook + ?Sized> {
    pub ctx: StateCtx<'a>,
    hook: &'h mut H,
    let_cache: HashMap<&'a str, Rc<IdSet<'a>>>,
}

impl<'a, 'h, H: WithinHook + ?Sized> Evaluator<'a, 'h, H> {
    pub fn new(ctx: StateCtx<'a>, hook: &'h mut H) -> Self {
        Evaluator {
            ctx,
            hook,
            let_cache: HashMap::new(),
        }
    }

    fn step(&self) -> usize {
        self.ctx.position
    }

    fn mismatch(&self, detail: String) -> EvalError {
        EvalError::TypeMismatch {
            detail,
            step: self.step(),
        }
    }

    pub fn formula(&mut self, f: &Formula, env: &mut Env) -> Result<bool, EvalError> {
        match f {
            Formula::Const(b) => Ok(*b),
            Formula::Cmp(a, op, b) => {
                // borrow plain operands instead of cloning them
                match (self.operand(a, env).is_some(), self.operand(b, env).is_some()) {
                    (true, true) => self.compare(self.operand(a, env).unwrap(), *op, self.operand(b, env).unwrap()),
                    (true, false) => {
                        let b = self.expr(b, env)?;
                        self.compare(self.operand(a, env).unwrap(), *op, &b)
                    }
                    (false, true) => {
                        let a = self.expr(a, env)?;
                        self.compare(&a, *op, self.operand(b, env).unwrap())
                    }
                    (false, false) => {
                        let a = self.expr(a, env)?;
                        let b = self.expr(b, env)?;
                        self.compare(&a, *op, &b)
                    }
                }
            }
            Formula::In(e, s) if matches!(self.operand(e, env), Some(Value::Comp(_))) => {
                let set = self.set(s, env)?;
                let Some(Value::Comp(id)) = self.operand(e, env) else { unreachable!() };
                Ok(set.contains(id.as_str()))
            }
            Formula::In(e, s) => {
                let v = self.expr(e, env)?;
                let Value::Comp(id) = v else {
                    return Err(self.mismatch(format!("membership test on {} value", v.type_name())));
                };
                let set = self.set(s, env)?;
                Ok(set.contains(id.as_str()))
            }
            Formula::Not(a) => Ok(!self.formula(a, env)?),
            Formula::And(a, b) => Ok(self.formula(a, env)? && self.formula(b, env)?),
            Formula::Or(a, b) => Ok(self.formula(a, env)? || self.formula(b, env)?),
            Formula::Implies(a, b) => Ok(!self.formula(a, env)? || self.formula(b, env)?),
            Formula::Forall(v, s, body) => {
                let domain = self.set(s, env)?;
                self.quantify(v, &domain, body, env, false)
            }
            Formula::Exists(v, s, body) => {
                let domain = self.set(s, env)?;
                self.quantify(v, &domain, body, env, true)
            }
            Formula::Within { .. } => {
                let ctx = self.ctx;
                self.hook.within(&ctx, f, env)
            }
        }
    }

    /// Binds `var` to each member in turn, stopping at the first body value
    /// equal to `stop_on`; the binding slot is reused across members.
    fn quantify(
        &mut self,
        var: &str,
        domain: &IdSet<'a>,
        body: &Formula,
        env: &mut Env,
        stop_on: bool,
    ) -> Result<bool, EvalError> {
        if domain.is_empty() {
            return Ok(!stop_on);
        }
        env.push((var.to_string(), Value::Comp(String::new())));
        let slot = env.len() - 1;
        let mut result = Ok(!stop_on);
        for id in domain.iter() {
            if let Value::Comp(current) = &mut env[slot].1 {
                current.clear();
                current.push_str(id);
            }
            match self.formula(body, env) {
                Ok(v) if v == stop_on => {
                    result = Ok(stop_on);
                    break;
                }
                Ok(_) => {}
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        env.truncate(slot);
        result
    }

    /// Literals, variables and attributes of bound components, by reference.
    /// `None` when the operand needs full evaluation or would fail.
    fn operand<'s>(&'s self, e: &'s Expr, env: &'s Env) -> Option<&'s Value> {
        match e {
            Expr::Lit(v) => Some(v),
            Expr::Var(name) => lookup(env, name),
            Expr::Attr(base, attr) => {
                let Expr::Var(name) = base.as_ref() else { return None };
                let Some(Value::Comp(id)) = lookup(env, name) else { return None };
                self.ctx.snapshot.component(id)?.attrs.get(attr)
            }
            _ => None,
        }
    }

    fn compare(&self, a: &Value, op: CmpOp, b: &Value) -> Result<bool, EvalError> {
        use std::cmp::Ordering;
        let ord: Option<Ordering> = match (a, b) {
            (Value::Int(x), Value::Int(y)) => Some(x.cmp(y)),
            (x, y) if x.is_numeric() && y.is_numeric() => {
                let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                x.partial_cmp(&y)
            }
            (Value::Str(x), Value::Str(y)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => Some(x.cmp(y)),
            (Value::Bool(x), Value::Bool(y)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => Some(x.cmp(y)),
            (Value::Comp(x), Value::Comp(y)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => Some(x.cmp(y)),
            _ => {
                return Err(self.mismatch(format!(
                    "cannot compare {} {op} {}",
                    a.type_name(),
                    b.type_name()
                )))
            }
        };
        let Some(ord) = ord else {
            // NaN compares unequal to everything
            return Ok(op == CmpOp::Ne);
        };
        Ok(match op {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        })
    }

    pub fn expr(&mut self, e: &Expr, env: &mut Env) -> Result<Value, EvalError> {
        match e {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(name) => lookup(env, name)
                .cloned()
                .ok_or_else(|| EvalError::UnboundVariable {
                    name: name.clone(),
                    step: self.step(),
                }),
            Expr::Attr(base, attr) => {
                let base = self.expr(base, env)?;
                let Value::Comp(id) = base else {
                    return Err(self.mismatch(format!(
                        "attribute `{attr}` read from {} value",
                        base.type_name()
                    )));
                };
                let component =
                    self.ctx
                        .snapshot
                        .component(&id)
                        .ok_or_else(|| EvalError::UnknownComponent {
                            component: id.clone(),
                            step: self.step(),
                        })?;
                component
                    .attrs
                    .get(attr)
                    .cloned()
                    .ok_or_else(|| EvalError::UnknownAttribute {
                        component: id,
                        attribute: attr.clone(),
                        step: self.step(),
                    })
            }
            Expr::Count(s) => Ok(Value::Int(self.set(s, env)?.len() as i64)),
            Expr::Endcount(Endcount::Beg) => Ok(Value::Int(self.ctx.position as i64)),
            Expr::Endcount(Endcount::Max) => match self.ctx.trace_len {
                Some(len) => Ok(Value::Int((len - 1 - self.ctx.position) as i64)),
                None => Err(EvalError::NeedsTraceLength { step: self.step() }),
            },
            Expr::Arith(op, a, b) => {
                let a = self.expr(a, env)?;
                let b = self.expr(b, env)?;
                self.arith(*op, &a, &b)
            }
        }
    }

    fn arith(&self, op: ArithOp, a: &Value, b: &Value) -> Result<Value, EvalError> {
        match (a, b) {
            (Value::Int(x), Value::Int(y)) => {
                let r = match op {
                    ArithOp::Add => x.checked_add(*y),
                    ArithOp::Sub => x.checked_sub(*y),
                    ArithOp::Mul => x.checked_mul(*y),
                };
                r.map(Value::Int)
                    .ok_or_else(|| self.mismatch("integer overflow".into()))
            }
            (x, y) if x.is_numeric() && y.is_numeric() => {
                let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                Ok(Value::Real(match op {
                    ArithOp::Add => x + y,
                    ArithOp::Sub => x - y,
                    ArithOp::Mul => x * y,
                }))
            }
            _ => Err(self.mismatch(format!(
                "arithmetic on {} and {}",
                a.type_name(),
                b.type_name()
            ))),
        }
    }

    pub fn set(&mut self, s: &SetExpr, env: &mut Env) -> Result<Rc<IdSet<'a>>, EvalError> {
        match s {
            SetExpr::Named(name) => self.named(name).map(Rc::new),
            SetExpr::Let(name) => {
                if let Some(hit) = self.let_cache.get(name.as_str()) {
                    return Ok(hit.clone());
                }
                let lets = self.ctx.lets;
                let Some((key, def)) = lets.iter().find(|(n, _)| n == name) else {
                    return Err(EvalError::UnknownSet {
                        name: name.clone(),
                        step: self.step(),
                    });
                };
                // lets are closed; evaluate without the caller's bindings
                let mut scratch = Env::new();
                let value = self
                    .set(def, &mut scratch)
                    .map_err(|e| EvalError::LetFailed {
                        name: name.clone(),
                        source: Box::new(e),
                    })?;
                self.let_cache.insert(key.as_str(), value.clone());
                Ok(value)
            }
            SetExpr::Comprehension {
                var,
                source,
                predicate,
            } => {
                let source = self.set(source, env)?;
                let mut out = Vec::new();
                env.push((var.clone(), Value::Comp(String::new())));
                let slot = env.len() - 1;
                for id in source.iter() {
                    if let Value::Comp(current) = &mut env[slot].1 {
                        current.clear();
                        current.push_str(id);
                    }
                    match self.formula(predicate, env) {
                        Ok(true) => out.push(*id),
                        Ok(false) => {}
                        Err(e) => {
                            env.truncate(slot);
                            return Err(e);
                        }
                    }
                }
                env.truncate(slot);
                Ok(Rc::new(IdSet::from_sorted(out)))
            }
            SetExpr::Intersect(a, b) => {
                let a = self.set(a, env)?;
                let b = self.set(b, env)?;
                Ok(Rc::new(a.intersection(&b)))
            }
            SetExpr::Union(a, b) => {
                let a = self.set(a, env)?;
                let b = self.set(b, env)?;
                Ok(Rc::new(a.union(&b)))
            }
        }
    }

    fn named(&self, name: &str) -> Result<IdSet<'a>, EvalError> {
        let snapshot: &'a Snapshot = self.ctx.snapshot;
        match self.ctx.vocab.resolve(name) {
            Some(SetSource::Ensemble(id)) => Ok(snapshot
                .ensembles
                .get(id)
                .map(|members| IdSet::from_sorted(members.iter().map(String::as_str).collect()))
                .unwrap_or_default()),
            Some(SetSource::ComponentType(kind)) => Ok(IdSet::from_sorted(
                snapshot
                    .components
                    .iter()
                    .filter(|(_, c)| &c.kind == kind)
                    .map(|(id, _)| id.as_str())
                    .collect(),
            )),
            None => Err(EvalError::UnknownSet {
                name: name.to_string(),
                step: self.step(),
            }),
        }
    }
}

/// Classical evaluation of a formula without `within` over one snapshot.
pub fn eval_state(
    f: &Formula,
    snapshot: &Snapshot,
    env: &Env,
    lets: &[(String, SetExpr)],
    vocab: &Vocabulary,
    trace_len: Option<usize>,
) -> Result<bool, EvalError> {
    let ctx = StateCtx {
        snapshot,
        position: snapshot.step,
        trace_len,
        lets,
        vocab,
    };
    let mut hook = NoTemporal;
    let mut env = env.clone();
    Evaluator::new(ctx, &mut hook).formula(f, &mut env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcl::{Bound, Component};

    fn vocab() -> Vocabulary {
        Vocabulary::new()
            .with_component_type("Villager")
            .with_ensemble("Attack")
            .with_ensemble("Farm")
    }

    fn villager(role: &str, location: &str) -> Component {
        Component::new("Villager")
            .with("role", role)
            .with("location", location)
            .with("hp", 4i64)
    }

    fn count_ge(set: &str, k: i64) -> Formula {
        Formula::Cmp(
            Expr::Count(SetExpr::named(set)),
            CmpOp::Ge,
            Expr::Lit(Value::Int(k)),
        )
    }

    #[test]
    fn cardinality_of_nonempty_ensemble() {
        let mut s = Snapshot::new(0);
        s.components.insert("v1".into(), villager("Warrior", "Cave"));
        s.ensembles.insert("Attack".into(), ["v1".to_string()].into());
        let r = eval_state(&count_ge("Attack", 1), &s, &Env::new(), &[], &vocab(), None);
        assert_eq!(r, Ok(true));
    }

    #[test]
    fn vacuous_forall_over_empty_let() {
        let s = Snapshot::new(0);
        let farmers = SetExpr::Comprehension {
            var: "v".into(),
            source: Box::new(SetExpr::named("Villagers")),
            predicate: Box::new(Formula::Cmp(
                Expr::Attr(Box::new(Expr::Var("v".into())), "role".into()),
                CmpOp::Eq,
                Expr::Lit("Farmer".into()),
            )),
        };
        let lets = vec![("Farmers".to_string(), farmers)];
        let f = Formula::forall(
            "f",
            SetExpr::Let("Farmers".into()),
            Formula::Cmp(
                Expr::Attr(Box::new(Expr::Var("f".into())), "location".into()),
                CmpOp::Eq,
                Expr::Lit("Village".into()),
            ),
        );
        assert_eq!(eval_state(&f, &s, &Env::new(), &lets, &vocab(), None), Ok(true));
        let e = Formula::Exists(
            "f".into(),
            SetExpr::Let("Farmers".into()),
            Box::new(Formula::Const(true)),
        );
        assert_eq!(eval_state(&e, &s, &Env::new(), &lets, &vocab(), None), Ok(false));
    }

    #[test]
    fn half_of_warriors_in_cave() {
        let mut s = Snapshot::new(3);
        s.components.insert("w1".into(), villager("Warrior", "Cave"));
        s.components.insert("w2".into(), villager("Warrior", "Village"));
        s.components.insert("w3".into(), villager("Warrior", "Village"));
        let by = |attr: &str, val: &str| SetExpr::Comprehension {
            var: "v".into(),
            source: Box::new(SetExpr::named("Villagers")),
            predicate: Box::new(Formula::Cmp(
                Expr::Attr(Box::new(Expr::Var("v".into())), attr.into()),
                CmpOp::Eq,
                Expr::Lit(val.into()),
            )),
        };
        let lets = vec![
            ("Warriors".to_string(), by("role", "Warrior")),
            ("InCave".to_string(), by("location", "Cave")),
        ];
        let f = Formula::Cmp(
            Expr::Count(SetExpr::Intersect(
                Box::new(SetExpr::Let("Warriors".into())),
                Box::new(SetExpr::Let("InCave".into())),
            )),
            CmpOp::Ge,
            Expr::Arith(
                ArithOp::Mul,
                Box::new(Expr::Lit(Value::Real(0.5))),
                Box::new(Expr::Count(SetExpr::Let("Warriors".into()))),
            ),
        );
        // oracle: enumerate memberships by hand
        let warriors = s.components.values().filter(|c| c.attrs["role"] == "Warrior".into()).count();
        let in_cave = s
            .components
            .values()
            .filter(|c| c.attrs["role"] == "Warrior".into() && c.attrs["location"] == "Cave".into())
            .count();
        let expected = (in_cave as f64) >= 0.5 * warriors as f64;
        assert!(!expected);
        assert_eq!(eval_state(&f, &s, &Env::new(), &lets, &vocab(), None), Ok(expected));
    }

    #[test]
    fn string_number_comparison_is_type_error() {
        let mut s = Snapshot::new(0);
        s.components.insert("v1".into(), villager("Farmer", "Village"));
        let f = Formula::forall(
            "v",
            SetExpr::named("Villagers"),
            Formula::Cmp(
                Expr::Attr(Box::new(Expr::Var("v".into())), "role".into()),
                CmpOp::Lt,
                Expr::Lit(Value::Int(3)),
            ),
        );
        let err = eval_state(&f, &s, &Env::new(), &[], &vocab(), None).unwrap_err();
        assert!(matches!(err, EvalError::TypeMismatch { step: 0, .. }));
    }

    #[test]
    fn errors_carry_names() {
        let s = Snapshot::new(2);
        let err = eval_state(&count_ge("Nope", 1), &s, &Env::new(), &[], &vocab(), None).unwrap_err();
        assert_eq!(
            err,
            EvalError::UnknownSet {
                name: "Nope".into(),
                step: 2
            }
        );
        let unbound = Formula::Cmp(Expr::Var("x".into()), CmpOp::Eq, Expr::Lit(Value::Int(1)));
        assert!(matches!(
            eval_state(&unbound, &s, &Env::new(), &[], &vocab(), None),
            Err(EvalError::UnboundVariable { .. })
        ));
        let temporal = Formula::within(Bound::Lit(1), Bound::Lit(1), Formula::Const(true));
        assert!(matches!(
            eval_state(&temporal, &s, &Env::new(), &[], &vocab(), None),
            Err(EvalError::TemporalInStateFormula { .. })
        ));
    }

    #[test]
    fn max_needs_length() {
        let s = Snapshot::new(1);
        let f = Formula::Cmp(Expr::Endcount(Endcount::Max), CmpOp::Gt, Expr::Lit(Value::Int(0)));
        assert!(eval_state(&f, &s, &Env::new(), &[], &vocab(), None)
            .unwrap_err()
            .needs_trace_length());
        assert_eq!(eval_state(&f, &s, &Env::new(), &[], &vocab(), Some(2)), Ok(false));
        assert_eq!(eval_state(&f, &s, &Env::new(), &[], &vocab(), Some(3)), Ok(true));
    }
}
