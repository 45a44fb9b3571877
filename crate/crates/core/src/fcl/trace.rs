use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Value;

pub type Attributes = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub attrs: Attributes,
}

impl Component {
    pub fn new(kind: impl Into<String>) -> Self {
        Component {
            kind: kind.into(),
            attrs: Attributes::new(),
        }
    }

    pub fn with(mut self, attr: impl Into<String>, value: impl Into<Value>) -> Self {
        self.attrs.insert(attr.into(), value.into());
        self
    }
}

/// System state at one adaptation step: component attributes plus the
/// ensemble assignment chosen at that step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub step: usize,
    pub components: BTreeMap<String, Component>,
    pub ensembles: BTreeMap<String, BTreeSet<String>>,
    #[serde(default)]
    pub beyond_control: BTreeMap<String, Attributes>,
}

impl Snapshot {
    pub fn new(step: usize) -> Self {
        Snapshot {
            step,
            ..Default::default()
        }
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.get(id)
    }

    pub fn ensemble(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.ensembles.get(id)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("snapshot serialization is infallible")
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("snapshot at position {position} has step index {found}")]
    NonContiguous { position: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Finite sequence of snapshots with contiguous step indices starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    snapshots: Vec<Snapshot>,
}

impl Trace {
    pub fn new(snapshots: Vec<Snapshot>) -> Result<Self, TraceError> {
        if snapshots.is_empty() {
            return Err(TraceError::Empty);
        }
        for (position, s) in snapshots.iter().enumerate() {
            if s.step != position {
                return Err(TraceError::NonContiguous {
                    position,
                    found: s.step,
                });
            }
        }
        Ok(Trace { snapshots })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, position: usize) -> &Snapshot {
        &self.snapshots[position]
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn into_snapshots(self) -> Vec<Snapshot> {
        self.snapshots
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Self, TraceError> {
        let mut snapshots = Vec::new();
        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let snapshot: Snapshot =
                serde_json::from_str(&line).map_err(|e| TraceError::Parse {
                    line: index + 1,
                    message: e.to_string(),
                })?;
            snapshots.push(snapshot);
        }
        Trace::new(snapshots)
    }

    pub fn write_jsonl(&self, mut writer: impl Write) -> std::io::Result<()> {
        for s in &self.snapshots {
            writeln!(writer, "{}", s.to_json_line())?;
        }
        Ok(())
    }
}
