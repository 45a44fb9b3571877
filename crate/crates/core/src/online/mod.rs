//! Step-by-step monitoring with temporal obligations.

mod classify;
mod history;
mod monitor;
mod report;

pub use classify::{classify, Shape, SubsetError};
pub use history::HistoryBuffer;
pub use monitor::{Horizon, LoadError, LoadErrorKind, Monitor, MonitorError, ObligationStatus};
pub use report::{dedup_earliest, render_feedback, sort_violations, Counts, Note, Violation, ViolationKind};
