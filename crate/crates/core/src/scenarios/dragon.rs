//! Dragon Hunt: villagers farm, spawn, walk to the Cave and fight a dragon.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Metrics, Param, Scenario, ScenarioError, Update};
use crate::fcl::{Attributes, Component, Snapshot, Value};

pub const PARAMS: &[Param] = &[
    Param { name: "farmer_count", default: 2.0, min: 0.0, max: 50.0, integer: true, help: "farmers at the start" },
    Param { name: "warrior_count", default: 1.0, min: 0.0, max: 50.0, integer: true, help: "warriors at the start" },
    Param { name: "max_steps", default: 30.0, min: 1.0, max: 1000.0, integer: true, help: "adaptation steps before the game is lost" },
    Param { name: "dragon_hp", default: 50.0, min: 1.0, max: 10000.0, integer: true, help: "dragon health" },
    Param { name: "counter_chance", default: 0.4, min: 0.0, max: 1.0, integer: false, help: "chance the dragon strikes back when attacked" },
    Param { name: "counter_damage", default: 2.0, min: 0.0, max: 100.0, integer: true, help: "damage of a counterattack" },
];

pub const ENSEMBLES: [&str; 7] = [
    "Farm",
    "GoToCave",
    "SpawnFarmer",
    "SpawnWarrior",
    "Attack",
    "StayInCave",
    "GoToVillage",
];

pub const DRAGON_ID: &str = "dragon";
pub const SILO_ID: &str = "farm";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Farmer,
    Warrior,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Farmer => "Farmer",
            Role::Warrior => "Warrior",
        }
    }

    pub fn start_hp(self) -> i64 {
        match self {
            Role::Farmer => 4,
            Role::Warrior => 6,
        }
    }

    pub fn harvest(self) -> i64 {
        match self {
            Role::Farmer => 5,
            Role::Warrior => 2,
        }
    }

    pub fn damage(self) -> i64 {
        match self {
            Role::Farmer => 1,
            Role::Warrior => 3,
        }
    }

    pub fn cost(self) -> i64 {
        match self {
            Role::Farmer => 10,
            Role::Warrior => 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Village,
    Cave,
}

impl Location {
    pub fn name(self) -> &'static str {
        match self {
            Location::Village => "Village",
            Location::Cave => "Cave",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Villager {
    pub id: String,
    pub role: Role,
    pub hp: i64,
    pub location: Location,
}

/// What happened during one update, for tests and logs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Events {
    pub harvested: i64,
    pub spawned: Vec<String>,
    pub damage_dealt: i64,
    pub counterattack: Option<String>,
    pub died: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct DragonHunt {
    pub villagers: Vec<Villager>,
    pub dragon_hp: i64,
    pub wheat: i64,
    step: usize,
    max_steps: usize,
    next_id: usize,
    counter_chance: f64,
    counter_damage: i64,
    rng: ChaCha8Rng,
    ensembles: BTreeMap<String, BTreeSet<String>>,
    pub last_events: Events,
}

impl DragonHunt {
    pub fn new(seed: u64, get: &dyn Fn(&str) -> f64) -> Self {
        let mut game = DragonHunt {
            villagers: Vec::new(),
            dragon_hp: get("dragon_hp") as i64,
            wheat: 0,
            step: 0,
            max_steps: get("max_steps") as usize,
            next_id: 1,
            counter_chance: get("counter_chance"),
            counter_damage: get("counter_damage") as i64,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ensembles: empty_ensembles(),
            last_events: Events::default(),
        };
        for _ in 0..get("farmer_count") as usize {
            game.spawn(Role::Farmer);
        }
        for _ in 0..get("warrior_count") as usize {
            game.spawn(Role::Warrior);
        }
        game
    }

    fn spawn(&mut self, role: Role) -> String {
        let id = format!("v{}", self.next_id);
        self.next_id += 1;
        self.villagers.push(Villager {
            id: id.clone(),
            role,
            hp: role.start_hp(),
            location: Location::Village,
        });
        id
    }

    pub fn won(&self) -> bool {
        self.dragon_hp <= 0
    }

    fn members(&self, update: &Update, ensemble: &str) -> Vec<usize> {
        self.villagers
            .iter()
            .enumerate()
            .filter(|(_, v)| update.get(&v.id).map(String::as_str) == Some(ensemble))
            .map(|(i, _)| i)
            .collect()
    }
}

fn empty_ensembles() -> BTreeMap<String, BTreeSet<String>> {
    ENSEMBLES.iter().map(|e| (e.to_string(), BTreeSet::new())).collect()
}

impl Scenario for DragonHunt {
    fn snapshot(&self) -> Snapshot {
        let mut s = Snapshot::new(self.step);
        for v in &self.villagers {
            s.components.insert(
                v.id.clone(),
                Component::new("Villager")
                    .with("role", v.role.name())
                    .with("hp", v.hp)
                    .with("location", v.location.name()),
            );
        }
        let dragon: Attributes = [("hp".to_string(), Value::Int(self.dragon_hp))].into();
        let silo: Attributes = [("wheat".to_string(), Value::Int(self.wheat))].into();
        s.components.insert(
            DRAGON_ID.into(),
            Component {
                kind: "Dragon".into(),
                attrs: dragon.clone(),
            },
        );
        s.components.insert(
            SILO_ID.into(),
            Component {
                kind: "Silo".into(),
                attrs: silo.clone(),
            },
        );
        s.beyond_control.insert(DRAGON_ID.into(), dragon);
        s.beyond_control.insert(SILO_ID.into(), silo);
        s.ensembles = self.ensembles.clone();
        s
    }

    fn apply(&mut self, update: &Update) -> Result<(), ScenarioError> {
        for (id, ensemble) in update {
            if !self.villagers.iter().any(|v| &v.id == id) {
                return Err(ScenarioError::UnknownComponent(id.clone()));
            }
            if !ENSEMBLES.contains(&ensemble.as_str()) {
                return Err(ScenarioError::UnknownEnsemble(ensemble.clone()));
            }
        }
        let mut ev = Events::default();

        for i in self.members(update, "Farm") {
            ev.harvested += self.villagers[i].role.harvest();
        }
        self.wheat += ev.harvested;

        for (ensemble, role) in [("SpawnFarmer", Role::Farmer), ("SpawnWarrior", Role::Warrior)] {
            let slots = self.members(update, ensemble).len() / 2;
            for _ in 0..slots {
                if self.wheat < role.cost() {
                    break;
                }
                self.wheat -= role.cost();
                ev.spawned.push(self.spawn(role));
            }
        }

        for i in self.members(update, "GoToCave") {
            self.villagers[i].location = Location::Cave;
        }
        for i in self.members(update, "GoToVillage") {
            self.villagers[i].location = Location::Village;
        }

        let attackers = self.members(update, "Attack");
        ev.damage_dealt = attackers.iter().map(|&i| self.villagers[i].role.damage()).sum();
        self.dragon_hp -= ev.damage_dealt;

        if !attackers.is_empty() && !self.won() && self.rng.gen_bool(self.counter_chance) {
            let &victim = attackers.choose(&mut self.rng).expect("attackers is non-empty");
            self.villagers[victim].hp -= self.counter_damage;
            ev.counterattack = Some(self.villagers[victim].id.clone());
        }

        let (alive, dead): (Vec<_>, Vec<_>) = std::mem::take(&mut self.villagers).into_iter().partition(|v| v.hp > 0);
        self.villagers = alive;
        ev.died = dead.into_iter().map(|v| v.id).collect();

        let mut ensembles = empty_ensembles();
        for (id, ensemble) in update {
            if self.villagers.iter().any(|v| &v.id == id) {
                ensembles.get_mut(ensemble).unwrap().insert(id.clone());
            }
        }
        self.ensembles = ensembles;
        self.step += 1;
        self.last_events = ev;
        Ok(())
    }

    fn step(&self) -> usize {
        self.step
    }

    fn is_terminal(&self) -> bool {
        self.won()
    }

    fn horizon(&self) -> usize {
        self.max_steps
    }

    fn metrics(&self) -> Metrics {
        let count = |r: Role| self.villagers.iter().filter(|v| v.role == r).count() as f64;
        let mut m = Metrics::new();
        m.insert("win".into(), if self.won() { 1.0 } else { 0.0 });
        m.insert("steps".into(), self.step as f64);
        if self.won() {
            m.insert("steps_to_win".into(), self.step as f64);
        }
        m.insert("dragon_hp".into(), self.dragon_hp as f64);
        m.insert("farmers".into(), count(Role::Farmer));
        m.insert("warriors".into(), count(Role::Warrior));
        m.insert("wheat".into(), self.wheat as f64);
        m
    }
}
