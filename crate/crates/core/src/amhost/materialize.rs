use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{AmEndpoint, SubprocessSpec};
use crate::adsl::ArchitectureSpec;

const ADAPTER_TEMPLATE: &str = include_str!("../../assets/am_adapter.py");
const GENERATED_MODULE: &str = "generated_am";

#[derive(Debug, Error)]
pub enum MaterializeError {
    #[error("the response contains no code block")]
    NoCodeBlock,
    #[error("the architecture specification has no am_interface")]
    NoInterface,
    #[error("generation language `{0}` cannot be executed; only python is supported")]
    UnsupportedLanguage(String),
    #[error("cannot write the AM files: {0}")]
    Io(#[from] std::io::Error),
}

/// Fenced code blocks of a response, in order, without their fences.
pub fn extract_code_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<(String, Vec<&str>)> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        match &mut current {
            None => {
                if let Some(rest) = trimmed.strip_prefix("```") {
                    current = Some((rest.trim().to_string(), Vec::new()));
                }
            }
            Some((_, body)) => {
                if trimmed.trim_end() == "```" {
                    let (_, body) = current.take().unwrap();
                    blocks.push(body.join("\n") + "\n");
                } else {
                    body.push(line);
                }
            }
        }
    }
    blocks
}

/// Python source of the abstract base class the AM derives from.
pub fn base_class_source(spec: &ArchitectureSpec) -> Option<String> {
    let am = spec.am_interface.as_ref()?;
    let mut out = format!("class {}(abc.ABC):\n", am.base);
    for a in &spec.assignments {
        out.push_str("    @abc.abstractmethod\n");
        out.push_str(&format!(
            "    def {}(self, components, environment, group_ids, step):\n        pass\n",
            a.method
        ));
    }
    Some(out)
}

#[derive(Debug, Clone)]
pub struct Materialized {
    pub endpoint: AmEndpoint,
    pub dir: PathBuf,
    /// Number of code blocks found; the last one is used.
    pub blocks: usize,
}

/// Writes the last code block of `response` next to a generated base module
/// and a protocol adapter, and returns an endpoint that runs it.
pub fn materialize_generated_am(
    response: &str,
    scratch: &Path,
    spec: &ArchitectureSpec,
    language: &str,
) -> Result<Materialized, MaterializeError> {
    if !language.eq_ignore_ascii_case("python") {
        return Err(MaterializeError::UnsupportedLanguage(language.to_string()));
    }
    let am = spec.am_interface.as_ref().ok_or(MaterializeError::NoInterface)?;
    let blocks = extract_code_blocks(response);
    let code = blocks.last().ok_or(MaterializeError::NoCodeBlock)?;
    std::fs::create_dir_all(scratch)?;
    let base = format!("import abc\n\n\n{}", base_class_source(spec).unwrap());
    std::fs::write(scratch.join(format!("{}.py", am.module)), base)?;
    std::fs::write(scratch.join(format!("{GENERATED_MODULE}.py")), code)?;
    let adapter = ADAPTER_TEMPLATE
        .replace("{{MODULE}}", &am.module)
        .replace("{{BASE}}", &am.base)
        .replace("{{CLASS}}", &am.class)
        .replace("{{GENERATED}}", GENERATED_MODULE);
    std::fs::write(scratch.join("am_adapter.py"), adapter)?;
    let mut sub = SubprocessSpec::new(python());
    sub.args = vec!["-B".into(), "am_adapter.py".into()];
    sub.dir = Some(scratch.to_path_buf());
    Ok(Materialized {
        endpoint: AmEndpoint::Subprocess(sub),
        dir: scratch.to_path_buf(),
        blocks: blocks.len(),
    })
}

/// Interpreter used for generated Python AMs (`FCLCAS_PYTHON`, else `python3`).
pub fn python() -> String {
    std::env::var("FCLCAS_PYTHON").unwrap_or_else(|_| "python3".to_string())
}
