//! `fclcas` command-line interface.
//!
//! Exit codes: 0 success, 1 violations found (or no valid AM), 2 usage or
//! input error, 3 online/offline disagreement in `verify --both`.

mod cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "fclcas", version, about = "Verify adaptation managers against functional constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

/// Spec, constraints and domain files; defaults follow the scenario name.
#[derive(Args, Clone)]
struct SystemArgs {
    /// Scenario implementing the system (dragon or farm).
    #[arg(long, default_value = "dragon")]
    scenario: String,
    /// Architecture spec; defaults to specs/<scenario>.adsl.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Constraint file; defaults to constraints/<scenario>.fcl.
    #[arg(long)]
    constraints: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GenArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Domain description; defaults to specs/<scenario>_domain.txt.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// `mock:<fixture dir>` or `http`.
    #[arg(long)]
    backend: String,
    #[arg(long = "max-iter", default_value_t = 10)]
    max_iter: usize,
    /// Discard the conversation when two reports in a row are identical.
    #[arg(long)]
    fresh_start: bool,
    /// Directory for generated AMs; a temporary one is used otherwise.
    #[arg(long)]
    scratch: Option<PathBuf>,
    #[arg(long, default_value = "Python")]
    language: String,
    #[arg(long, default_value = "https://api.openai.com/v1")]
    base_url: String,
    #[arg(long, default_value = "gpt-5-nano-2025-08-07")]
    model: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    api_key_env: String,
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and cross-check an architecture spec and a constraint file.
    Check { spec: PathBuf, constraints: PathBuf },
    /// Run one initial state with an adaptation manager.
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        /// `builtin:<name>` or `cmd:<program> [args]`.
        #[arg(long)]
        am: String,
        /// Initial state name; the first one by default.
        #[arg(long)]
        initial_state: Option<String>,
        /// Overrides the initial state's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides a scenario parameter, e.g. `--param dragon_hp=40`.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Writes the trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Writes the violation report as JSON lines.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check a recorded trace against constraints.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        /// Takes the vocabulary from a spec instead of the trace.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["offline", "both"])]
        online: bool,
        #[arg(long, conflicts_with = "both")]
        offline: bool,
        /// Runs both checkers and compares their verdicts.
        #[arg(long)]
        both: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the generation prompt.
    Prompt {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long, default_value = "with-constraints")]
        variant: String,
        #[arg(long, default_value = "Python")]
        language: String,
    },
    /// Generate an AM with the feedback loop.
    Loop {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value = "generic+functional")]
        mode: String,
        #[arg(long, default_value = "with-constraints")]
        variant: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Repeat the loop over feedback modes and prompt variants.
    Experiment {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Comma-separated feedback modes; all by default.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<String>,
        /// Comma-separated prompt variants; all by default.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<String>,
        /// CSV output.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for independent loops.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render a saved violation report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// `text` or `feedback:<mode>`.
        #[arg(long, default_value = "text")]
        render: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cmd::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
