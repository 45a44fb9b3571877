//! Repeated loops over feedback modes and prompt variants.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{run_loop, Backend, FeedbackMode, LoopConfig, LoopContext, Variant};
use crate::exec::{self, Exec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub mode: String,
    pub variant: String,
    pub repeat: usize,
    pub iterations: usize,
    pub valid: bool,
}

/// Runs every (mode, variant) cell `repeats` times with a fresh backend per loop.
pub fn run_experiment<F>(
    ctx: &LoopContext<'_>,
    modes: &[FeedbackMode],
    variants: &[Variant],
    repeats: usize,
    base: &LoopConfig,
    make_backend: F,
    exec_mode: Exec,
) -> Vec<ExperimentRow>
where
    F: Fn() -> Box<dyn Backend> + Sync + Send,
{
    let mut jobs = Vec::new();
    for &m in modes {
        for &v in variants {
            for r in 1..=repeats {
                jobs.push((m, v, r));
            }
        }
    }
    exec::map(exec_mode, &jobs, |&(mode, variant, repeat)| {
        let mut cfg = base.clone();
        cfg.mode = mode;
        cfg.variant = variant;
        cfg.scratch = base
            .scratch
            .join(format!("{}-{}-{repeat:02}", mode.name().replace('+', "-"), variant.name()));
        let mut backend = make_backend();
        let result = run_loop(ctx, backend.as_mut(), &cfg);
        ExperimentRow {
            mode: mode.name().to_string(),
            variant: variant.name().to_string(),
            repeat,
            iterations: result.iterations,
            valid: result.valid,
        }
    })
}

pub fn write_table(rows: &[ExperimentRow], w: impl Write) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_table(r: impl Read) -> Result<Vec<ExperimentRow>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

/// Outcome of one loop for histogram purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bucket {
    ValidAt(usize),
    NotFound,
}

/// Counts per (mode, variant) cell; each cell sums to its repeat count.
pub fn histogram(rows: &[ExperimentRow]) -> BTreeMap<(String, String), BTreeMap<Bucket, usize>> {
    let mut out: BTreeMap<(String, String), BTreeMap<Bucket, usize>> = BTreeMap::new();
    for r in rows {
        let bucket = if r.valid { Bucket::ValidAt(r.iterations) } else { Bucket::NotFound };
        *out.entry((r.mode.clone(), r.variant.clone()))
            .or_default()
            .entry(bucket)
            .or_default() += 1;
    }
    out
}

pub fn render_histogram(rows: &[ExperimentRow]) -> String {
    let mut out = String::new();
    for ((mode, variant), buckets) in histogram(rows) {
        let total: usize = buckets.values().sum();
        let _ = writeln!(out, "{mode} / {variant} ({total} runs)");
        for (bucket, n) in buckets {
            let label = match bucket {
                Bucket::ValidAt(k) => format!("{k:>2} iter"),
                Bucket::NotFound => "not found".to_string(),
            };
            let _ = writeln!(out, "  {label:>9} | {:<20} {n}", "#".repeat(n.min(20)));
        }
    }
    out
}
