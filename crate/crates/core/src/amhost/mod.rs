//! Invocation of adaptation managers, in process or over the line protocol.

mod materialize;
pub mod protocol;
mod subprocess;

use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub use materialize::{base_class_source, extract_code_blocks, materialize_generated_am, python, MaterializeError, Materialized};
pub use protocol::{AmFailure, AssignRequest, AssignResponse, ComponentView, Handshake};
pub use subprocess::SubprocessAm;

/// Decides ensemble membership for the components of one assignment call.
pub trait AdaptationManager: Send {
    fn invoke(&mut self, request: &AssignRequest) -> Result<AssignResponse, HostError>;
}

impl<F> AdaptationManager for F
where
    F: FnMut(&AssignRequest) -> Result<AssignResponse, HostError> + Send,
{
    fn invoke(&mut self, request: &AssignRequest) -> Result<AssignResponse, HostError> {
        self(request)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HostError {
    #[error("unknown builtin AM `{0}`")]
    UnknownBuiltin(String),
    #[error("could not start `{program}`: {reason}")]
    Spawn { program: String, reason: String },
    #[error("no handshake within {after:?}{}", stderr_suffix(.stderr))]
    HandshakeTimeout { after: Duration, stderr: String },
    #[error("AM failed to start: {message}{}", traceback_suffix(.traceback))]
    Startup { message: String, traceback: String },
    #[error("malformed {what} from AM: {reason} in line {line:?}")]
    Malformed { what: &'static str, line: String, reason: String },
    #[error("`{method}` did not answer within {after:?}")]
    CallTimeout { method: String, after: Duration },
    #[error("AM process exited ({status}){}", stderr_suffix(.stderr))]
    Exited { status: String, stderr: String },
}

fn stderr_suffix(stderr: &str) -> String {
    if stderr.trim().is_empty() {
        String::new()
    } else {
        format!("; stderr:\n{}", stderr.trim_end())
    }
}

fn traceback_suffix(tb: &str) -> String {
    if tb.trim().is_empty() {
        String::new()
    } else {
        format!("\n{}", tb.trim_end())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubprocessSpec {
    pub program: String,
    pub args: Vec<String>,
    pub dir: Option<PathBuf>,
    pub startup_timeout: Duration,
    pub call_timeout: Duration,
}

impl SubprocessSpec {
    pub fn new(program: impl Into<String>) -> Self {
        SubprocessSpec {
            program: program.into(),
            args: Vec::new(),
            dir: None,
            startup_timeout: Duration::from_secs(20),
            call_timeout: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AmEndpoint {
    Builtin(String),
    Subprocess(SubprocessSpec),
}

impl AmEndpoint {
    /// `builtin:<name>` or `cmd:<program> [args...]`.
    pub fn parse(text: &str) -> Result<AmEndpoint, String> {
        if let Some(name) = text.strip_prefix("builtin:") {
            if crate::scenarios::builtin_names().contains(&name) {
                return Ok(AmEndpoint::Builtin(name.to_string()));
            }
            return Err(format!(
                "unknown builtin `{name}`; known: {}",
                crate::scenarios::builtin_names().join(", ")
            ));
        }
        if let Some(cmd) = text.strip_prefix("cmd:") {
            let mut words = cmd.split_whitespace();
            let program = words.next().ok_or("`cmd:` needs a program")?;
            let mut spec = SubprocessSpec::new(program);
            spec.args = words.map(str::to_string).collect();
            return Ok(AmEndpoint::Subprocess(spec));
        }
        Err(format!("expected `builtin:<name>` or `cmd:<program>`, got `{text}`"))
    }

    /// Starts a fresh AM instance; each run gets its own.
    pub fn open(&self) -> Result<Box<dyn AdaptationManager>, HostError> {
        match self {
            AmEndpoint::Builtin(name) => {
                crate::scenarios::builtin_am(name).ok_or_else(|| HostError::UnknownBuiltin(name.clone()))
            }
            AmEndpoint::Subprocess(spec) => Ok(Box::new(SubprocessAm::start(spec)?)),
        }
    }
}

/// Calls the AM; transport failures are returned, AM-raised errors are
/// part of the response.
pub fn invoke(am: &mut dyn AdaptationManager, request: &AssignRequest) -> Result<AssignResponse, HostError> {
    am.invoke(request)
}
