//! Prompt generation from an architecture spec and a domain description.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adsl::{ArchitectureSpec, AttributeDef};
use crate::amhost::base_class_source;
use crate::fcl::Constraint;

pub const SECTION_BREAK: &str = "---";
pub const EXACTLY_ONE: &str = "Every component must be assigned to exactly one group.";
pub const CLOSER: &str = "Think step by step. Start by reasoning about the task and analysing the problem. \
Next, describe the adaptation manager you propose. Finally, write its {LANG} code.";
const READ_ONLY: &str = "all read-only; they keep their values when the component is assigned to a group";
const SYSTEM: &str = "You are an experienced software engineer who designs adaptation managers for self-adaptive systems.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    WithConstraints,
    WithoutConstraints,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::WithConstraints, Variant::WithoutConstraints];

    pub fn name(self) -> &'static str {
        match self {
            Variant::WithConstraints => "with-constraints",
            Variant::WithoutConstraints => "without-constraints",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Message {
            role,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub variant: Variant,
    /// System message followed by the initial user message.
    pub messages: Vec<Message>,
    /// The user prompt on its own.
    pub text: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("the architecture specification has no am_interface")]
    NoInterface,
}

fn attribute_lines(out: &mut String, attrs: &[AttributeDef]) {
    for a in attrs {
        let _ = write!(out, "\n- `{}`", a.id);
        match (&a.display, &a.description) {
            (Some(d), Some(x)) => {
                let _ = write!(out, ": {d} ({x})");
            }
            (Some(d), None) => {
                let _ = write!(out, ": {d}");
            }
            (None, Some(x)) => {
                let _ = write!(out, ": {x}");
            }
            (None, None) => {}
        }
    }
}

/// The requirements paragraph; empty when there are no constraints.
pub fn requirements_block(constraints: &[Constraint]) -> String {
    if constraints.is_empty() {
        return String::new();
    }
    let mut out = String::from("The adaptation manager must satisfy these functional requirements:");
    for c in constraints {
        let _ = write!(out, "\n- {}", c.description);
    }
    out
}

/// Builds the initial prompt. Rendering is deterministic in its inputs.
pub fn generate_prompt(
    spec: &ArchitectureSpec,
    domain: &str,
    constraints: &[Constraint],
    variant: Variant,
    language: &str,
) -> Result<PromptBundle, PromptError> {
    let am = spec.am_interface.as_ref().ok_or(PromptError::NoInterface)?;
    let base = base_class_source(spec).ok_or(PromptError::NoInterface)?;
    let mut warnings = Vec::new();
    let mut parts: Vec<String> = Vec::new();

    let domain = domain.trim();
    if !domain.is_empty() {
        parts.push(domain.to_string());
    }
    parts.push(format!(
        "Your task is to write an adaptation manager that places the components into groups. {EXACTLY_ONE} \
A component that should keep doing what it does has to be assigned to its group again at every step."
    ));
    parts.push(format!(
        "Write the adaptation manager in {language} as a class called `{}` that inherits from the base class below, \
importable from the module `{}`:\n```\n{}```\nAssign groups by calling `environment.assign_group(component, group_id)`. \
Use the group ids exactly as they are written below.",
        am.class,
        am.module,
        base
    ));
    for a in &spec.assignments {
        let mut s = format!(
            "{SECTION_BREAK}\nMethod `{}` receives the {} as `components`. Split them into these groups:",
            a.method, a.label
        );
        for e in &a.ensembles {
            if let Some(def) = spec.ensemble(e) {
                let _ = write!(s, "\n- \"{}\"", def.group);
                if let Some(d) = &def.description {
                    let _ = write!(s, ": {d}");
                }
            }
        }
        s.push_str("\n\nThe `group_ids` parameter lists every valid group id.");
        if let Some(c) = spec.component(&a.kind) {
            if !c.attributes.is_empty() {
                let _ = write!(s, "\n\nEach component exposes these attributes ({READ_ONLY}):");
                attribute_lines(&mut s, &c.attributes);
            }
        }
        parts.push(s);
    }
    if !spec.beyond_control.is_empty() {
        let mut s = format!(
            "{SECTION_BREAK}\nThe following beyond-control components can be observed but never assigned to a group."
        );
        for b in &spec.beyond_control {
            let _ = write!(s, "\n\n{}, available as `environment.{}`", b.description, b.accessor);
            match spec.component(&b.kind) {
                Some(c) if !c.attributes.is_empty() => {
                    let _ = write!(s, ", with these attributes ({READ_ONLY}):");
                    attribute_lines(&mut s, &c.attributes);
                }
                _ => s.push('.'),
            }
        }
        parts.push(s);
    }
    let strategy = spec.strategy.as_deref().map(str::trim).unwrap_or("");
    let mut tail = vec![SECTION_BREAK.to_string()];
    if strategy.is_empty() {
        warnings.push("the specification has no strategy; the strategy section is omitted".to_string());
    } else {
        tail.push(strategy.to_string());
    }
    parts.push(tail.join("\n"));
    if variant == Variant::WithConstraints && !constraints.is_empty() {
        parts.push(requirements_block(constraints));
    }
    parts.push(CLOSER.replace("{LANG}", language));

    let text = parts.join("\n\n") + "\n";
    Ok(PromptBundle {
        variant,
        messages: vec![Message::new(Role::System, SYSTEM), Message::new(Role::User, text.clone())],
        text,
        warnings,
    })
}
