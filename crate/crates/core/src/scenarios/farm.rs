//! Smart Farm: drones chase bird flocks away from crop fields on a line.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Metrics, Param, Scenario, ScenarioError, Update};
use crate::fcl::{Attributes, Component, Snapshot, Value};

pub const PARAMS: &[Param] = &[
    Param { name: "drone_count", default: 3.0, min: 0.0, max: 20.0, integer: true, help: "number of drones" },
    Param { name: "flock_count", default: 2.0, min: 0.0, max: 20.0, integer: true, help: "number of bird flocks" },
    Param { name: "max_steps", default: 40.0, min: 1.0, max: 1000.0, integer: true, help: "adaptation steps per run" },
    Param { name: "scare_chance", default: 0.5, min: 0.0, max: 1.0, integer: false, help: "chance a flock leaves a field guarded by a drone" },
    Param { name: "wander_chance", default: 0.1, min: 0.0, max: 1.0, integer: false, help: "chance an unguarded flock moves on" },
    Param { name: "damage_unit", default: 0.05, min: 0.0, max: 10.0, integer: false, help: "damage per unprotected bird and step" },
];

pub const FIELD_AREAS: [f64; 5] = [10.0, 8.0, 12.0, 9.0, 11.0];
pub const IDLE: &str = "Idle";
pub const IDLE_TARGET: &str = "idle";

pub fn field_name(k: usize) -> String {
    format!("field{k}")
}

pub fn protect_ensemble(k: usize) -> String {
    format!("Protect{k}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub position: i64,
    pub area: f64,
    pub damage: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drone {
    pub id: String,
    pub position: i64,
    /// Index of the target field, `None` when idle.
    pub target: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flock {
    pub field: usize,
    pub size: i64,
}

#[derive(Debug, Clone)]
pub struct SmartFarm {
    pub fields: Vec<Field>,
    pub drones: Vec<Drone>,
    pub flocks: Vec<Flock>,
    step: usize,
    max_steps: usize,
    scare_chance: f64,
    wander_chance: f64,
    damage_unit: f64,
    rng: ChaCha8Rng,
    ensembles: BTreeMap<String, BTreeSet<String>>,
}

impl SmartFarm {
    pub fn new(seed: u64, get: &dyn Fn(&str) -> f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields: Vec<Field> = FIELD_AREAS
            .iter()
            .enumerate()
            .map(|(k, &area)| Field {
                position: k as i64,
                area,
                damage: 0.0,
            })
            .collect();
        let center = (fields.len() / 2) as i64;
        let drones = (1..=get("drone_count") as usize)
            .map(|k| Drone {
                id: format!("d{k}"),
                position: center,
                target: None,
            })
            .collect();
        let flocks = (0..get("flock_count") as usize)
            .map(|_| Flock {
                field: rng.gen_range(0..fields.len()),
                size: rng.gen_range(1..=3),
            })
            .collect();
        SmartFarm {
            fields,
            drones,
            flocks,
            step: 0,
            max_steps: get("max_steps") as usize,
            scare_chance: get("scare_chance"),
            wander_chance: get("wander_chance"),
            damage_unit: get("damage_unit"),
            rng,
            ensembles: empty_ensembles(FIELD_AREAS.len()),
        }
    }

    pub fn birds(&self, field: usize) -> i64 {
        self.flocks.iter().filter(|f| f.field == field).map(|f| f.size).sum()
    }

    fn guards(&self, field: usize) -> i64 {
        let pos = self.fields[field].position;
        self.drones.iter().filter(|d| d.position == pos).count() as i64
    }

    pub fn damage_rate(&self) -> f64 {
        let damage: f64 = self.fields.iter().map(|f| f.damage).sum();
        let area: f64 = self.fields.iter().map(|f| f.area).sum();
        damage / area
    }

    fn field_attrs(&self, k: usize) -> Attributes {
        let f = &self.fields[k];
        [
            ("name".to_string(), Value::Str(field_name(k))),
            ("position".to_string(), Value::Int(f.position)),
            ("area".to_string(), Value::Real(f.area)),
            ("birds".to_string(), Value::Int(self.birds(k))),
            ("damage".to_string(), Value::Real(f.damage)),
        ]
        .into()
    }
}

fn empty_ensembles(fields: usize) -> BTreeMap<String, BTreeSet<String>> {
    (0..fields)
        .map(protect_ensemble)
        .chain([IDLE.to_string()])
        .map(|e| (e, BTreeSet::new()))
        .collect()
}

impl Scenario for SmartFarm {
    fn snapshot(&self) -> Snapshot {
        let mut s = Snapshot::new(self.step);
        for k in 0..self.fields.len() {
            let attrs = self.field_attrs(k);
            s.components.insert(
                field_name(k),
                Component {
                    kind: "Field".into(),
                    attrs: attrs.clone(),
                },
            );
            s.beyond_control.insert(field_name(k), attrs);
        }
        for d in &self.drones {
            let target = d.target.map(field_name).unwrap_or_else(|| IDLE_TARGET.to_string());
            s.components.insert(
                d.id.clone(),
                Component::new("Drone")
                    .with("position", d.position)
                    .with("target", target),
            );
        }
        s.ensembles = self.ensembles.clone();
        s
    }

    fn apply(&mut self, update: &Update) -> Result<(), ScenarioError> {
        let mut ensembles = empty_ensembles(self.fields.len());
        for (id, ensemble) in update {
            let Some(d) = self.drones.iter_mut().find(|d| &d.id == id) else {
                return Err(ScenarioError::UnknownComponent(id.clone()));
            };
            let members = ensembles
                .get_mut(ensemble)
                .ok_or_else(|| ScenarioError::UnknownEnsemble(ensemble.clone()))?;
            members.insert(id.clone());
            d.target = ensemble.strip_prefix("Protect").and_then(|k| k.parse().ok());
        }
        self.ensembles = ensembles;

        for d in &mut self.drones {
            if let Some(t) = d.target {
                d.position += (self.fields[t].position - d.position).signum();
            }
        }

        for k in 0..self.fields.len() {
            let exposed = (self.birds(k) - self.guards(k)).max(0) as f64;
            let f = &mut self.fields[k];
            f.damage = (f.damage + exposed * self.damage_unit).min(f.area);
        }

        let n = self.fields.len();
        for i in 0..self.flocks.len() {
            let guarded = self.guards(self.flocks[i].field) > 0;
            let chance = if guarded { self.scare_chance } else { self.wander_chance };
            if n > 1 && self.rng.gen_bool(chance) {
                // flocks hop to a neighbouring field
                let f = self.flocks[i].field;
                self.flocks[i].field = match f {
                    0 => 1,
                    _ if f == n - 1 => f - 1,
                    _ if self.rng.gen_bool(0.5) => f - 1,
                    _ => f + 1,
                };
            }
        }

        self.step += 1;
        Ok(())
    }

    fn step(&self) -> usize {
        self.step
    }

    fn is_terminal(&self) -> bool {
        false
    }

    fn horizon(&self) -> usize {
        self.max_steps
    }

    fn metrics(&self) -> Metrics {
        let mut m = Metrics::new();
        m.insert("damage_rate".into(), self.damage_rate());
        m.insert("total_damage".into(), self.fields.iter().map(|f| f.damage).sum());
        m.insert("steps".into(), self.step as f64);
        m
    }
}
