//! Static classification of constraints into the online-checkable subset.

use thiserror::Error;

use crate::fcl::bound::{check_pair, BoundError};
use crate::fcl::offline::split_prefix;
use crate::fcl::names::sets;
use crate::fcl::{Bound, Constraint, Endcount, Formula, SetExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubsetError {
    #[error("nested within")]
    NestedWithin,
    #[error("only one implication is allowed, found {0}")]
    TooManyImplications(usize),
    #[error("a forward within must be the whole constraint or the whole consequent of its implication")]
    MisplacedForward,
    #[error("a backward within may only appear in the antecedent of the implication")]
    MisplacedBackward,
    #[error("a backward within must not refer to quantified variables")]
    OpenBackwardBody,
    #[error("backward window bounds must not depend on MAX or INF")]
    LengthDependentBackward,
    #[error("within cannot appear inside a set definition")]
    WithinInSet,
    #[error("MAX cannot appear inside a within body or a set definition")]
    MaxInStateTerm,
    #[error("invalid bound: {0}")]
    Bound(#[from] BoundError),
}

/// How the matrix (the formula under the universal prefix) is monitored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `within[n, t] body` with `t` forward.
    Eventual,
    /// `antecedent implies within[n, t] body` with `t` forward.
    Triggered,
    /// A state formula, possibly with backward windows in an antecedent.
    Invariant,
}

fn is_within(f: &Formula) -> bool {
    matches!(f, Formula::Within { .. })
}

fn withins(f: &Formula) -> Vec<&Formula> {
    let mut out = Vec::new();
    f.visit(&mut |node| {
        if is_within(node) {
            out.push(node)
        }
    });
    out
}

fn forward(f: &Formula) -> bool {
    matches!(f, Formula::Within { t, .. } if t.is_forward())
}

fn check_set(s: &SetExpr) -> Result<(), SubsetError> {
    let mut temporal = false;
    s.visit_formulas(&mut |f| temporal |= is_within(f));
    if temporal {
        return Err(SubsetError::WithinInSet);
    }
    if s.mentions_endcount(Endcount::Max) {
        return Err(SubsetError::MaxInStateTerm);
    }
    Ok(())
}

fn check_backward(node: &Formula) -> Result<(), SubsetError> {
    let Formula::Within { n, t, body } = node else {
        return Ok(());
    };
    if !body.free_vars().is_empty() {
        return Err(SubsetError::OpenBackwardBody);
    }
    if n.depends_on_length() || t.depends_on_length() {
        return Err(SubsetError::LengthDependentBackward);
    }
    Ok(())
}

/// Accepts a constraint into the online subset, or names the first
/// restriction it breaks.
pub fn classify(c: &Constraint) -> Result<Shape, SubsetError> {
    let implications = c.body.count_implications()
        + c.lets
            .iter()
            .map(|(_, s)| {
                let mut k = 0;
                s.visit_formulas(&mut |f| k += usize::from(matches!(f, Formula::Implies(..))));
                k
            })
            .sum::<usize>();
    if implications > 1 {
        return Err(SubsetError::TooManyImplications(implications));
    }
    for (_, s) in &c.lets {
        check_set(s)?;
    }
    for s in sets(&c.body) {
        check_set(s)?;
    }
    for w in withins(&c.body) {
        let Formula::Within { n, t, body } = w else { unreachable!() };
        if body.contains_within() {
            return Err(SubsetError::NestedWithin);
        }
        check_pair(n, t)?;
        if body.mentions_endcount(Endcount::Max) {
            return Err(SubsetError::MaxInStateTerm);
        }
    }

    let (_, matrix) = split_prefix(&c.body);
    match matrix {
        Formula::Within { .. } if forward(matrix) => Ok(Shape::Eventual),
        Formula::Within { .. } => Err(SubsetError::MisplacedBackward),
        Formula::Implies(a, b) => {
            for w in withins(a) {
                if forward(w) {
                    return Err(SubsetError::MisplacedForward);
                }
                check_backward(w)?;
            }
            if forward(b) {
                return Ok(Shape::Triggered);
            }
            match withins(b).first() {
                None => Ok(Shape::Invariant),
                Some(w) if forward(w) => Err(SubsetError::MisplacedForward),
                Some(_) => Err(SubsetError::MisplacedBackward),
            }
        }
        other => match withins(other).first() {
            None => Ok(Shape::Invariant),
            Some(w) if forward(w) => Err(SubsetError::MisplacedForward),
            Some(_) => Err(SubsetError::MisplacedBackward),
        },
    }
}

/// Whether a bound resolves without knowing the trace length.
pub(crate) fn static_bound(b: &Bound) -> bool {
    !b.depends_on_length()
}
