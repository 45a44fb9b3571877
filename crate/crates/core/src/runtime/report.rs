use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::online::Violation;
use crate::scenarios::Metrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// All adaptation steps were executed.
    Horizon,
    /// The scenario ended on its own (e.g. the dragon died).
    Terminal,
    /// A generic constraint was violated.
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub initial_state: String,
    pub seed: u64,
    pub steps: usize,
    pub stop: StopReason,
    pub metrics: Metrics,
    pub violations: Vec<Violation>,
}

/// Violations of every run of a batch, tagged by initial state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub runs: Vec<RunReport>,
}

/// One line of a report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReportRecord {
    Run {
        initial_state: String,
        seed: u64,
        steps: usize,
        stop: StopReason,
        metrics: Metrics,
    },
    Violation {
        initial_state: String,
        #[serde(flatten)]
        violation: Violation,
    },
}

impl ViolationReport {
    /// An AM is valid when no run reports a violation.
    pub fn is_valid(&self) -> bool {
        self.runs.iter().all(|r| r.violations.is_empty())
    }

    pub fn violation_count(&self) -> usize {
        self.runs.iter().map(|r| r.violations.len()).sum()
    }

    pub fn violations(&self) -> impl Iterator<Item = (&str, &Violation)> {
        self.runs
            .iter()
            .flat_map(|r| r.violations.iter().map(move |v| (r.initial_state.as_str(), v)))
    }

    /// Metrics averaged over runs, for the metrics feedback mode.
    pub fn mean_metrics(&self) -> BTreeMap<String, f64> {
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in &self.runs {
            for (k, v) in &r.metrics {
                let e = sums.entry(k.clone()).or_default();
                e.0 += v;
                e.1 += 1;
            }
        }
        sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
    }

    pub fn records(&self) -> Vec<ReportRecord> {
        let mut out = Vec::new();
        for r in &self.runs {
            out.push(ReportRecord::Run {
                initial_state: r.initial_state.clone(),
                seed: r.seed,
                steps: r.steps,
                stop: r.stop,
                metrics: r.metrics.clone(),
            });
            for v in &r.violations {
                out.push(ReportRecord::Violation {
                    initial_state: r.initial_state.clone(),
                    violation: v.clone(),
                });
            }
        }
        out
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for r in self.records() {
            writeln!(w, "{}", serde_json::to_string(&r).expect("records serialize"))?;
        }
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<ViolationReport, String> {
        let mut report = ViolationReport::default();
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ReportRecord =
                serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", n + 1))?;
            match record {
                ReportRecord::Run {
                    initial_state,
                    seed,
                    steps,
                    stop,
                    metrics,
                } => report.runs.push(RunReport {
                    initial_state,
                    seed,
                    steps,
                    stop,
                    metrics,
                    violations: Vec::new(),
                }),
                ReportRecord::Violation {
                    initial_state,
                    violation,
                } => match report.runs.last_mut() {
                    Some(run) if run.initial_state == initial_state => run.violations.push(violation),
                    _ => return Err(format!("line {}: violation before its run record", n + 1)),
                },
            }
        }
        Ok(report)
    }
}
