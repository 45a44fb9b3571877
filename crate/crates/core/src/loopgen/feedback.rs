//! Feedback messages sent back after a failed verification.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::online::{render_feedback, Violation, ViolationKind};
use crate::runtime::ViolationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackMode {
    /// Every generic and functional violation.
    GenericFunctional,
    /// Generic violations only.
    GenericOnly,
    /// Scenario metrics only.
    Metrics,
}

impl FeedbackMode {
    pub const ALL: [FeedbackMode; 3] = [FeedbackMode::GenericFunctional, FeedbackMode::GenericOnly, FeedbackMode::Metrics];

    pub fn name(self) -> &'static str {
        match self {
            FeedbackMode::GenericFunctional => "generic+functional",
            FeedbackMode::GenericOnly => "generic-only",
            FeedbackMode::Metrics => "metrics",
        }
    }

    pub fn parse(s: &str) -> Option<FeedbackMode> {
        FeedbackMode::ALL.into_iter().find(|m| m.name() == s)
    }
}

const CLOSING: &str = "Revise the adaptation manager accordingly and reply with the complete corrected code.";

/// Human-readable line for one averaged metric.
pub fn metric_line(name: &str, value: f64) -> String {
    match name {
        "win" => format!("win rate: {:.0}%", value * 100.0),
        "damage_rate" => format!("damage rate: {:.1}%", value * 100.0),
        "steps_to_win" => format!("average number of steps to win: {value:.1}"),
        other => format!("average {}: {}", other.replace('_', " "), trim_number(value)),
    }
}

fn trim_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

fn violation_sections(report: &ViolationReport, keep: impl Fn(&Violation) -> bool) -> String {
    let per_state: Vec<(&str, Vec<Violation>)> = report
        .runs
        .iter()
        .map(|r| (r.initial_state.as_str(), r.violations.iter().filter(|v| keep(v)).cloned().collect()))
        .filter(|(_, v): &(&str, Vec<Violation>)| !v.is_empty())
        .collect();
    let mut out = String::new();
    let same = per_state.len() == report.runs.len()
        && per_state.len() > 1
        && per_state.windows(2).all(|w| w[0].1 == w[1].1);
    if same {
        let _ = write!(out, "In every initial state:\n{}", render_feedback(&per_state[0].1));
        return out;
    }
    for (k, (state, vs)) in per_state.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = write!(out, "In initial state \"{state}\":\n{}", render_feedback(vs));
    }
    out
}

/// Renders the feedback for a failed iteration; empty for a valid report.
pub fn format_feedback(report: &ViolationReport, mode: FeedbackMode) -> String {
    if report.is_valid() {
        return String::new();
    }
    let body = match mode {
        FeedbackMode::GenericFunctional => {
            let text = violation_sections(report, |_| true);
            format!("Running the adaptation manager revealed these constraint violations:\n\n{text}")
        }
        FeedbackMode::GenericOnly => {
            let text = violation_sections(report, |v| v.kind == ViolationKind::Generic);
            if text.is_empty() {
                "The adaptation manager ran, but it does not meet all requirements yet.".to_string()
            } else {
                format!("Running the adaptation manager revealed these constraint violations:\n\n{text}")
            }
        }
        FeedbackMode::Metrics => {
            let metrics = report.mean_metrics();
            let usable = report.runs.iter().any(|r| r.steps > 0);
            if metrics.is_empty() || !usable {
                "The adaptation manager could not be run, so no results are available.".to_string()
            } else {
                let mut s = String::from("Running the adaptation manager gave these results:");
                for (k, v) in &metrics {
                    if k == "steps" {
                        continue;
                    }
                    let _ = write!(s, "\n- {}", metric_line(k, *v));
                }
                s
            }
        }
    };
    format!("{}\n\n{CLOSING}", body.trim_end())
}
