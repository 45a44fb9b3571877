use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::fcl::Binding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Functional,
    Generic,
}

/// Observed and required counts of a failed window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub trues: u64,
    pub falses: u64,
    pub required: u64,
    pub window: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Constraint description, or the generic rule name.
    pub constraint: String,
    /// Position of the constraint in its document, for functional ones.
    pub constraint_index: Option<usize>,
    /// Step the check was anchored at.
    pub step: usize,
    pub binding: Binding,
    pub detail: String,
    /// Rendering of the part of the formula that failed.
    pub subformula: Option<String>,
    pub counts: Option<Counts>,
}

impl Violation {
    pub fn generic(rule: &str, step: usize, detail: impl Into<String>) -> Self {
        Violation {
            kind: ViolationKind::Generic,
            constraint: rule.to_string(),
            constraint_index: None,
            step,
            binding: Vec::new(),
            detail: detail.into(),
            subformula: None,
            counts: None,
        }
    }

    pub(crate) fn sort_key(&self) -> (usize, ViolationKind, Option<usize>, &Binding) {
        (self.step, self.kind, self.constraint_index, &self.binding)
    }
}

/// An informational record: a window that could not finish because a
/// component it was about left the system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub constraint: String,
    pub constraint_index: usize,
    pub step: usize,
    pub binding: Binding,
    pub detail: String,
}

pub fn sort_violations(v: &mut [Violation]) {
    v.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Keeps the earliest violation per (constraint, binding), preserving order.
pub fn dedup_earliest(violations: &[Violation]) -> Vec<Violation> {
    let mut seen = BTreeSet::new();
    violations
        .iter()
        .filter(|v| seen.insert((v.kind, v.constraint.clone(), v.binding.clone())))
        .cloned()
        .collect()
}

pub(crate) fn binding_text(binding: &Binding) -> String {
    binding
        .iter()
        .map(|(v, id)| format!("{v}={id}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Feedback block listing violations, one per line.
pub fn render_feedback(violations: &[Violation]) -> String {
    let mut out = String::new();
    for v in violations {
        let kind = match v.kind {
            ViolationKind::Functional => "Functional constraint",
            ViolationKind::Generic => "Generic constraint",
        };
        let _ = write!(out, "- {kind} \"{}\" violated at step {}", v.constraint, v.step);
        if !v.binding.is_empty() {
            let _ = write!(out, " for {}", binding_text(&v.binding));
        }
        let _ = writeln!(out, ": {}", v.detail);
    }
    out
}
