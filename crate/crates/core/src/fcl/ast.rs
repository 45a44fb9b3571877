//! Abstract syntax of the functional constraint logic.
//!
//! `Display` renders the concrete ASCII syntax accepted by [`crate::fcdsl`];
//! rendering inserts only the parentheses needed to reparse the same tree.

use std::collections::BTreeSet;
use std::fmt;

use super::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endcount {
    /// Steps from the current step to the end of the trace.
    Max,
    /// Steps from the beginning of the trace to the current step.
    Beg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    Attr(Box<Expr>, String),
    Count(SetExpr),
    Var(String),
    Endcount(Endcount),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetExpr {
    /// A component-type set (`Villagers`) or an ensemble (`Attack`).
    Named(String),
    /// A set defined by a `let` of the enclosing constraint.
    Let(String),
    Comprehension {
        var: String,
        source: Box<SetExpr>,
        predicate: Box<Formula>,
    },
    Intersect(Box<SetExpr>, Box<SetExpr>),
    Union(Box<SetExpr>, Box<SetExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Lit(i64),
    Max,
    Beg,
    Inf,
    Scaled { factor: f64, endcount: Endcount },
}

impl Bound {
    /// Whether a window bound looks forward in time.
    pub fn is_forward(&self) -> bool {
        match self {
            Bound::Lit(k) => *k >= 0,
            Bound::Max | Bound::Inf => true,
            Bound::Beg => false,
            Bound::Scaled { endcount, .. } => *endcount == Endcount::Max,
        }
    }

    /// Whether the resolved value depends on the trace length.
    pub fn depends_on_length(&self) -> bool {
        matches!(
            self,
            Bound::Max
                | Bound::Inf
                | Bound::Scaled {
                    endcount: Endcount::Max,
                    ..
                }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Const(bool),
    Cmp(Expr, CmpOp, Expr),
    In(Expr, SetExpr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, SetExpr, Box<Formula>),
    Exists(String, SetExpr, Box<Formula>),
    /// `within[n, t] body`: body holds at least `n` times in the window `t`.
    Within { n: Bound, t: Bound, body: Box<Formula> },
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn within(n: Bound, t: Bound, body: Formula) -> Formula {
        Formula::Within {
            n,
            t,
            body: Box::new(body),
        }
    }

    pub fn forall(var: impl Into<String>, set: SetExpr, body: Formula) -> Formula {
        Formula::Forall(var.into(), set, Box::new(body))
    }

    pub fn contains_within(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, Formula::Within { .. }));
        found
    }

    /// Pre-order visit of every formula node, including predicates of set
    /// comprehensions.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Const(_) => {}
            Formula::Cmp(a, _, b) => {
                a.visit_formulas(f);
                b.visit_formulas(f);
            }
            Formula::In(e, s) => {
                e.visit_formulas(f);
                s.visit_formulas(f);
            }
            Formula::Not(a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Forall(_, s, body) | Formula::Exists(_, s, body) => {
                s.visit_formulas(f);
                body.visit(f);
            }
            Formula::Within { body, .. } => body.visit(f),
        }
    }

    /// Whether the endcount appears as a value inside an expression.
    pub fn mentions_endcount(&self, which: Endcount) -> bool {
        let mut found = false;
        self.visit(&mut |node| match node {
            Formula::Cmp(a, _, b) => {
                found |= a.mentions_endcount_shallow(which) || b.mentions_endcount_shallow(which)
            }
            Formula::In(e, _) => found |= e.mentions_endcount_shallow(which),
            _ => {}
        });
        found
    }

    /// Free variables (not bound by a quantifier or comprehension inside).
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Const(_) => {}
            Formula::Cmp(a, _, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::In(e, s) => {
                e.collect_free(bound, out);
                s.collect_free(bound, out);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, s, body) | Formula::Exists(v, s, body) => {
                s.collect_free(bound, out);
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::Within { body, .. } => body.collect_free(bound, out),
        }
    }

    pub fn count_implications(&self) -> usize {
        let mut count = 0;
        self.visit(&mut |f| {
            if matches!(f, Formula::Implies(..)) {
                count += 1
            }
        });
        count
    }
}

impl Expr {
    fn visit_formulas<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        match self {
            Expr::Attr(e, _) => e.visit_formulas(f),
            Expr::Count(s) => s.visit_formulas(f),
            Expr::Arith(_, a, b) => {
                a.visit_formulas(f);
                b.visit_formulas(f);
            }
            Expr::Lit(_) | Expr::Var(_) | Expr::Endcount(_) => {}
        }
    }

    fn mentions_endcount_shallow(&self, which: Endcount) -> bool {
        match self {
            Expr::Endcount(e) => *e == which,
            Expr::Attr(e, _) => e.mentions_endcount_shallow(which),
            Expr::Arith(_, a, b) => {
                a.mentions_endcount_shallow(which) || b.mentions_endcount_shallow(which)
            }
            // set predicates are visited as formulas
            Expr::Count(_) | Expr::Lit(_) | Expr::Var(_) => false,
        }
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Expr::Attr(e, _) => e.collect_free(bound, out),
            Expr::Count(s) => s.collect_free(bound, out),
            Expr::Arith(_, a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Expr::Lit(_) | Expr::Endcount(_) => {}
        }
    }
}

impl SetExpr {
    pub fn named(name: impl Into<String>) -> SetExpr {
        SetExpr::Named(name.into())
    }

    pub(crate) fn visit_formulas<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        match self {
            SetExpr::Named(_) | SetExpr::Let(_) => {}
            SetExpr::Comprehension {
                source, predicate, ..
            } => {
                source.visit_formulas(f);
                predicate.visit(f);
            }
            SetExpr::Intersect(a, b) | SetExpr::Union(a, b) => {
                a.visit_formulas(f);
                b.visit_formulas(f);
            }
        }
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            SetExpr::Named(_) | SetExpr::Let(_) => {}
            SetExpr::Comprehension {
                var,
                source,
                predicate,
            } => {
                source.collect_free(bound, out);
                bound.push(var.clone());
                predicate.collect_free(bound, out);
                bound.pop();
            }
            SetExpr::Intersect(a, b) | SetExpr::Union(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
        }
    }

    /// Names of sets referenced directly (not through lets).
    pub fn named_sets(&self, out: &mut BTreeSet<String>) {
        match self {
            SetExpr::Named(n) => {
                out.insert(n.clone());
            }
            SetExpr::Let(_) => {}
            SetExpr::Comprehension {
                source, predicate, ..
            } => {
                source.named_sets(out);
                predicate.named_sets(out);
            }
            SetExpr::Intersect(a, b) | SetExpr::Union(a, b) => {
                a.named_sets(out);
                b.named_sets(out);
            }
        }
    }

    pub fn mentions_endcount(&self, which: Endcount) -> bool {
        let mut found = false;
        self.visit_formulas(&mut |f| found |= f.mentions_endcount(which));
        found
    }
}

impl Formula {
    /// Names of sets referenced anywhere in the formula.
    pub fn named_sets(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |f| match f {
            Formula::In(e, s) => {
                e.named_sets(out);
                s.named_sets(out);
            }
            Formula::Cmp(a, _, b) => {
                a.named_sets(out);
                b.named_sets(out);
            }
            Formula::Forall(_, s, _) | Formula::Exists(_, s, _) => s.named_sets(out),
            _ => {}
        });
    }

    /// Attribute names accessed anywhere in the formula.
    pub fn attributes(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |f| match f {
            Formula::In(e, _) => e.attributes(out),
            Formula::Cmp(a, _, b) => {
                a.attributes(out);
                b.attributes(out);
            }
            _ => {}
        });
    }
}

impl Expr {
    fn named_sets(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Count(s) => s.named_sets(out),
            Expr::Attr(e, _) => e.named_sets(out),
            Expr::Arith(_, a, b) => {
                a.named_sets(out);
                b.named_sets(out);
            }
            _ => {}
        }
    }

    fn attributes(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Attr(e, a) => {
                out.insert(a.clone());
                e.attributes(out);
            }
            Expr::Arith(_, a, b) => {
                a.attributes(out);
                b.attributes(out);
            }
            _ => {}
        }
    }
}

/// A functional constraint: description forwarded to prompts and reports,
/// set definitions, and the formula checked against traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub description: String,
    pub lets: Vec<(String, SetExpr)>,
    pub body: Formula,
}

impl Constraint {
    pub fn new(description: impl Into<String>, body: Formula) -> Self {
        Constraint {
            description: description.into(),
            lets: Vec::new(),
            body,
        }
    }

    pub fn with_let(mut self, name: impl Into<String>, set: SetExpr) -> Self {
        self.lets.push((name.into(), set));
        self
    }

    pub fn is_online_checkable(&self) -> bool {
        crate::online::classify(self).is_ok()
    }
}

// ---------------------------------------------------------------------------
// rendering

const P_QUANT: u8 = 0;
const P_IMPLIES: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_UNARY: u8 = 4;
const P_ATOM: u8 = 5;

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => P_QUANT,
        Formula::Implies(..) => P_IMPLIES,
        Formula::Or(..) => P_OR,
        Formula::And(..) => P_AND,
        Formula::Not(_) | Formula::Within { .. } => P_UNARY,
        Formula::Const(_) | Formula::Cmp(..) | Formula::In(..) => P_ATOM,
    }
}

fn write_formula(out: &mut fmt::Formatter<'_>, f: &Formula, ctx: u8) -> fmt::Result {
    let paren = formula_prec(f) < ctx;
    if paren {
        out.write_str("(")?;
    }
    match f {
        Formula::Const(b) => write!(out, "{b}")?,
        Formula::Cmp(a, op, b) => write!(out, "{a} {op} {b}")?,
        Formula::In(e, s) => write!(out, "{e} in {s}")?,
        Formula::Not(a) => {
            out.write_str("not ")?;
            write_formula(out, a, P_UNARY)?;
        }
        Formula::And(a, b) => {
            write_formula(out, a, P_AND)?;
            out.write_str(" and ")?;
            write_formula(out, b, P_UNARY)?;
        }
        Formula::Or(a, b) => {
            write_formula(out, a, P_OR)?;
            out.write_str(" or ")?;
            write_formula(out, b, P_AND)?;
        }
        Formula::Implies(a, b) => {
            write_formula(out, a, P_OR)?;
            out.write_str(" implies ")?;
            write_formula(out, b, P_IMPLIES)?;
        }
        Formula::Forall(v, s, body) => {
            write!(out, "forall {v} in {s}: ")?;
            write_formula(out, body, P_QUANT)?;
        }
        Formula::Exists(v, s, body) => {
            write!(out, "exists {v} in {s}: ")?;
            write_formula(out, body, P_QUANT)?;
        }
        Formula::Within { n, t, body } => {
            write!(out, "within[{n}, {t}] ")?;
            write_formula(out, body, P_UNARY)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, P_QUANT)
    }
}

const E_ADD: u8 = 1;
const E_MUL: u8 = 2;
const E_ATOM: u8 = 3;

fn write_expr(out: &mut fmt::Formatter<'_>, e: &Expr, ctx: u8) -> fmt::Result {
    let prec = match e {
        Expr::Arith(ArithOp::Add | ArithOp::Sub, ..) => E_ADD,
        Expr::Arith(ArithOp::Mul, ..) => E_MUL,
        _ => E_ATOM,
    };
    let paren = prec < ctx;
    if paren {
        out.write_str("(")?;
    }
    match e {
        Expr::Lit(Value::Str(s)) => write_string(out, s)?,
        Expr::Lit(v) => write!(out, "{v}")?,
        Expr::Attr(base, attr) => {
            write_expr(out, base, E_ATOM)?;
            write!(out, ".{attr}")?;
        }
        Expr::Count(s) => write!(out, "count({s})")?,
        Expr::Var(v) => out.write_str(v)?,
        Expr::Endcount(Endcount::Max) => out.write_str("MAX")?,
        Expr::Endcount(Endcount::Beg) => out.write_str("BEG")?,
        Expr::Arith(op, a, b) => {
            let (sym, left, right) = match op {
                ArithOp::Add => ("+", E_ADD, E_MUL),
                ArithOp::Sub => ("-", E_ADD, E_MUL),
                ArithOp::Mul => ("*", E_MUL, E_ATOM),
            };
            write_expr(out, a, left)?;
            write!(out, " {sym} ")?;
            write_expr(out, b, right)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

pub(crate) fn write_string(out: &mut impl fmt::Write, s: &str) -> fmt::Result {
    out.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => out.write_str("\\\"")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            c => out.write_char(c)?,
        }
    }
    out.write_char('"')
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, E_ADD)
    }
}

fn write_set(out: &mut fmt::Formatter<'_>, s: &SetExpr, ctx: u8) -> fmt::Result {
    let prec = match s {
        SetExpr::Union(..) => 1,
        SetExpr::Intersect(..) => 2,
        _ => 3,
    };
    let paren = prec < ctx;
    if paren {
        out.write_str("(")?;
    }
    match s {
        SetExpr::Named(n) | SetExpr::Let(n) => out.write_str(n)?,
        SetExpr::Comprehension {
            var,
            source,
            predicate,
        } => write!(out, "{{{var} in {source} | {predicate}}}")?,
        SetExpr::Union(a, b) => {
            write_set(out, a, 1)?;
            out.write_str(" union ")?;
            write_set(out, b, 2)?;
        }
        SetExpr::Intersect(a, b) => {
            write_set(out, a, 2)?;
            out.write_str(" intersect ")?;
            write_set(out, b, 3)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_set(f, self, 1)
    }
}

impl fmt::Display for Endcount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endcount::Max => "MAX",
            Endcount::Beg => "BEG",
        })
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Lit(k) => write!(f, "{k}"),
            Bound::Max => f.write_str("MAX"),
            Bound::Beg => f.write_str("BEG"),
            Bound::Inf => f.write_str("INF"),
            Bound::Scaled { factor, endcount } => write!(f, "{factor:?}*{endcount}"),
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}
