//! Seeded case-study simulators, hand-written AMs and scenario metrics.

mod baselines;
pub mod dragon;
pub mod farm;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::adsl::InitialState;
use crate::fcl::Snapshot;

pub use baselines::{builtin_am, builtin_names};

pub type Metrics = BTreeMap<String, f64>;

/// Component id to ensemble id for one adaptation step.
pub type Update = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("update names unknown component `{0}`")]
    UnknownComponent(String),
    #[error("update names unknown ensemble `{0}`")]
    UnknownEnsemble(String),
}

pub trait Scenario: Send {
    /// Current state, with the ensembles chosen by the last update.
    fn snapshot(&self) -> Snapshot;
    fn apply(&mut self, update: &Update) -> Result<(), ScenarioError>;
    /// Adaptation steps applied so far.
    fn step(&self) -> usize;
    /// The run ended before the horizon (e.g. the game was won).
    fn is_terminal(&self) -> bool;
    fn horizon(&self) -> usize;
    fn metrics(&self) -> Metrics;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Param {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub integer: bool,
    pub help: &'static str,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("initial state \"{state}\": unknown parameter `{name}` for scenario {scenario}")]
    Unknown { state: String, name: String, scenario: &'static str },
    #[error("initial state \"{state}\": `{name}` = {value} is outside [{min}, {max}]")]
    OutOfRange { state: String, name: String, value: f64, min: f64, max: f64 },
    #[error("initial state \"{state}\": `{name}` must be an integer, got {value}")]
    NotInteger { state: String, name: String, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Dragon,
    Farm,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Option<ScenarioKind> {
        match name {
            "dragon" => Some(ScenarioKind::Dragon),
            "farm" => Some(ScenarioKind::Farm),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Dragon => "dragon",
            ScenarioKind::Farm => "farm",
        }
    }

    pub fn parameters(self) -> &'static [Param] {
        match self {
            ScenarioKind::Dragon => dragon::PARAMS,
            ScenarioKind::Farm => farm::PARAMS,
        }
    }

    /// Checks names and ranges of the state's parameters.
    pub fn validate(self, state: &InitialState) -> Result<(), ParamError> {
        let params = self.parameters();
        for (name, &value) in &state.params {
            let Some(p) = params.iter().find(|p| p.name == name) else {
                return Err(ParamError::Unknown {
                    state: state.name.clone(),
                    name: name.clone(),
                    scenario: self.name(),
                });
            };
            if p.integer && value.fract() != 0.0 {
                return Err(ParamError::NotInteger {
                    state: state.name.clone(),
                    name: name.clone(),
                    value,
                });
            }
            if !(p.min..=p.max).contains(&value) {
                return Err(ParamError::OutOfRange {
                    state: state.name.clone(),
                    name: name.clone(),
                    value,
                    min: p.min,
                    max: p.max,
                });
            }
        }
        Ok(())
    }

    pub fn init(self, state: &InitialState) -> Result<Box<dyn Scenario>, ParamError> {
        self.validate(state)?;
        let get = |name: &str| {
            state.param(name).unwrap_or_else(|| {
                self.parameters()
                    .iter()
                    .find(|p| p.name == name)
                    .map(|p| p.default)
                    .expect("parameter is registered")
            })
        };
        Ok(match self {
            ScenarioKind::Dragon => Box::new(dragon::DragonHunt::new(state.seed, &get)),
            ScenarioKind::Farm => Box::new(farm::SmartFarm::new(state.seed, &get)),
        })
    }

    /// Help text listing the registered parameters.
    pub fn parameter_help(self) -> String {
        self.parameters()
            .iter()
            .map(|p| format!("  {} (default {}, range {}..={}): {}\n", p.name, p.default, p.min, p.max, p.help))
            .collect()
    }
}
