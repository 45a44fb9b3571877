//! Static name resolution for constraints.

use std::collections::BTreeSet;

use thiserror::Error;

use super::eval::Vocabulary;
use super::{Constraint, Expr, Formula, SetExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("unknown set `{0}`")]
    UnknownSet(String),
    #[error("let `{0}` is used before it is defined")]
    UndefinedLet(String),
    #[error("let `{0}` is defined twice")]
    DuplicateLet(String),
}

fn expr_sets<'a>(e: &'a Expr, out: &mut Vec<&'a SetExpr>) {
    match e {
        Expr::Count(s) => out.push(s),
        Expr::Attr(b, _) => expr_sets(b, out),
        Expr::Arith(_, a, b) => {
            expr_sets(a, out);
            expr_sets(b, out);
        }
        Expr::Lit(_) | Expr::Var(_) | Expr::Endcount(_) => {}
    }
}

/// Set expressions referenced directly by formula nodes, including those in
/// comprehension predicates reached by the visit.
pub(crate) fn sets(f: &Formula) -> Vec<&SetExpr> {
    let mut out = Vec::new();
    f.visit(&mut |node| match node {
        Formula::Cmp(a, _, b) => {
            expr_sets(a, &mut out);
            expr_sets(b, &mut out);
        }
        Formula::In(e, s) => {
            expr_sets(e, &mut out);
            out.push(s);
        }
        Formula::Forall(_, s, _) | Formula::Exists(_, s, _) => out.push(s),
        _ => {}
    });
    out
}

fn let_refs(s: &SetExpr, out: &mut BTreeSet<String>) {
    match s {
        SetExpr::Named(_) => {}
        SetExpr::Let(n) => {
            out.insert(n.clone());
        }
        SetExpr::Comprehension {
            source, predicate, ..
        } => {
            let_refs(source, out);
            for inner in sets(predicate) {
                let_refs(inner, out);
            }
        }
        SetExpr::Intersect(a, b) | SetExpr::Union(a, b) => {
            let_refs(a, out);
            let_refs(b, out);
        }
    }
}

/// Checks that every set name resolves and lets are defined before use.
pub fn check_names(c: &Constraint, vocab: &Vocabulary) -> Result<(), NameError> {
    let mut defined: BTreeSet<String> = BTreeSet::new();
    let mut named = BTreeSet::new();
    for (name, def) in &c.lets {
        let mut refs = BTreeSet::new();
        let_refs(def, &mut refs);
        if let Some(missing) = refs.into_iter().find(|r| !defined.contains(r)) {
            return Err(NameError::UndefinedLet(missing));
        }
        def.named_sets(&mut named);
        if !defined.insert(name.clone()) {
            return Err(NameError::DuplicateLet(name.clone()));
        }
    }
    let mut refs = BTreeSet::new();
    for s in sets(&c.body) {
        let_refs(s, &mut refs);
    }
    if let Some(missing) = refs.into_iter().find(|r| !defined.contains(r)) {
        return Err(NameError::UndefinedLet(missing));
    }
    c.body.named_sets(&mut named);
    match named.into_iter().find(|n| vocab.resolve(n).is_none()) {
        Some(n) => Err(NameError::UnknownSet(n)),
        None => Ok(()),
    }
}
