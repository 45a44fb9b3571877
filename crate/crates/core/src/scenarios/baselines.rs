//! Hand-written AMs: baselines that follow the strategies and misbehaving
//! ones used to exercise the verifier.

use std::collections::{BTreeMap, BTreeSet};

use crate::amhost::{AdaptationManager, AssignRequest, AssignResponse, ComponentView, HostError};
use crate::fcl::Value;

const BUILTINS: [&str; 7] = [
    "dragon-baseline",
    "dragon-idle",
    "dragon-no-warriors",
    "dragon-double",
    "dragon-wrong-group",
    "farm-baseline",
    "farm-static",
];

pub fn builtin_names() -> &'static [&'static str] {
    &BUILTINS
}

pub fn builtin_am(name: &str) -> Option<Box<dyn AdaptationManager>> {
    Some(match name {
        "dragon-baseline" => Box::new(DragonBaseline::new(30)),
        "dragon-no-warriors" => Box::new(DragonBaseline {
            warriors_allowed: false,
            ..DragonBaseline::new(30)
        }),
        "dragon-idle" => Box::new(DragonIdle),
        "dragon-double" => Box::new(DragonDouble),
        "dragon-wrong-group" => Box::new(DragonWrongGroup(DragonBaseline::new(30))),
        "farm-baseline" => Box::new(FarmBaseline::default()),
        "farm-static" => Box::new(FarmStatic),
        _ => return None,
    })
}

fn attr_str<'a>(c: &'a ComponentView, name: &str) -> &'a str {
    c.attrs.get(name).and_then(Value::as_str).unwrap_or("")
}

fn attr_num(attrs: Option<&BTreeMap<String, Value>>, name: &str) -> f64 {
    attrs.and_then(|a| a.get(name)).and_then(Value::as_f64).unwrap_or(0.0)
}

fn assign(pairs: Vec<(String, &str)>) -> Result<AssignResponse, HostError> {
    Ok(AssignResponse::Assignments(
        pairs.into_iter().map(|(id, g)| (id, g.to_string())).collect(),
    ))
}

/// Warriors go to the Cave and attack; farmers farm and spawn in pairs,
/// alternating the kind of villager they spawn.
#[derive(Debug, Clone)]
pub struct DragonBaseline {
    max_steps: usize,
    warriors_allowed: bool,
    prefer_warrior: bool,
    /// Upper bound on the warriors that will be in the Cave next step.
    cave_warriors_next: usize,
    sent_to_cave: usize,
}

impl DragonBaseline {
    pub fn new(max_steps: usize) -> Self {
        DragonBaseline {
            max_steps,
            warriors_allowed: true,
            prefer_warrior: true,
            cave_warriors_next: 0,
            sent_to_cave: 0,
        }
    }

    fn village(&mut self, req: &AssignRequest) -> Vec<(String, &'static str)> {
        let wheat = attr_num(req.beyond_control.get("farm"), "wheat") as i64;
        let dragon_hp = attr_num(req.beyond_control.get("dragon"), "hp") as i64;
        let mut out = Vec::new();
        let mut farmers = Vec::new();
        self.sent_to_cave = 0;
        for c in &req.components {
            if attr_str(c, "role") == "Warrior" {
                out.push((c.id.clone(), "cave"));
                self.sent_to_cave += 1;
            } else {
                farmers.push(c.id.clone());
            }
        }
        // a warrior spawned on the last step, or on the step the dragon
        // dies, would never get to walk to the Cave
        let final_step = req.step >= self.max_steps || dragon_hp <= 3 * self.cave_warriors_next as i64;
        let warrior_ok = self.warriors_allowed && !final_step;
        let mut spawn: Option<&'static str> = None;
        if farmers.len() >= 2 {
            let harvest = wheat + 5 * (farmers.len() as i64 - 2);
            let order: [(&'static str, i64, bool); 2] = if self.prefer_warrior {
                [("spawn warrior", 12, warrior_ok), ("spawn farmer", 10, true)]
            } else {
                [("spawn farmer", 10, true), ("spawn warrior", 12, warrior_ok)]
            };
            spawn = order
                .iter()
                .find(|(_, cost, ok)| *ok && harvest >= *cost)
                .map(|(g, _, _)| *g);
        }
        for (k, id) in farmers.into_iter().enumerate() {
            match spawn {
                Some(g) if k < 2 => out.push((id, g)),
                _ => out.push((id, "farm")),
            }
        }
        if let Some(g) = spawn {
            self.prefer_warrior = g == "spawn farmer";
        }
        out
    }

    fn cave(&mut self, req: &AssignRequest) -> Vec<(String, &'static str)> {
        let mut attackers = 0;
        let out = req
            .components
            .iter()
            .map(|c| {
                if attr_str(c, "role") == "Warrior" {
                    attackers += 1;
                    (c.id.clone(), "attack")
                } else {
                    (c.id.clone(), "village")
                }
            })
            .collect();
        self.cave_warriors_next = attackers + self.sent_to_cave;
        out
    }
}

impl AdaptationManager for DragonBaseline {
    fn invoke(&mut self, req: &AssignRequest) -> Result<AssignResponse, HostError> {
        match req.method.as_str() {
            "assign_in_village" => assign(self.village(req)),
            "assign_in_cave" => {
                let out = self.cave(req);
                assign(out)
            }
            other => Ok(unknown_method(other)),
        }
    }
}

fn unknown_method(name: &str) -> AssignResponse {
    AssignResponse::Error(crate::amhost::AmFailure {
        message: format!("AttributeError: no method {name}"),
        traceback: String::new(),
    })
}

/// Everybody farms in the Village and waits in the Cave.
struct DragonIdle;

impl AdaptationManager for DragonIdle {
    fn invoke(&mut self, req: &AssignRequest) -> Result<AssignResponse, HostError> {
        let group = match req.method.as_str() {
            "assign_in_village" => "farm",
            _ => "cave",
        };
        assign(req.components.iter().map(|c| (c.id.clone(), group)).collect())
    }
}

/// Puts every villager in the Village into two groups at once.
struct DragonDouble;

impl AdaptationManager for DragonDouble {
    fn invoke(&mut self, req: &AssignRequest) -> Result<AssignResponse, HostError> {
        let mut out = Vec::new();
        for c in &req.components {
            if req.method == "assign_in_village" {
                out.push((c.id.clone(), "farm"));
                out.push((c.id.clone(), "cave"));
            } else {
                out.push((c.id.clone(), "attack"));
            }
        }
        assign(out)
    }
}

/// Plays like the baseline but sends villagers in the Cave to farm.
struct DragonWrongGroup(DragonBaseline);

impl AdaptationManager for DragonWrongGroup {
    fn invoke(&mut self, req: &AssignRequest) -> Result<AssignResponse, HostError> {
        if req.method == "assign_in_cave" {
            return assign(req.components.iter().map(|c| (c.id.clone(), "farm")).collect());
        }
        self.0.invoke(req)
    }
}

/// Drone `k` always protects field `k mod 5`.
struct FarmStatic;

impl AdaptationManager for FarmStatic {
    fn invoke(&mut self, req: &AssignRequest) -> Result<AssignResponse, HostError> {
        let fields = req.group_ids.iter().filter(|g| g.starts_with("protect")).count().max(1);
        Ok(AssignResponse::Assignments(
            req.components
                .iter()
                .enumerate()
                .map(|(k, c)| (c.id.clone(), format!("protect field{}", k % fields)))
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Duty {
    /// Heading to or guarding a field with birds.
    Guard(usize),
    /// Visiting a field to check on it; can be called away.
    Patrol(usize),
}

impl Duty {
    fn field(self) -> usize {
        match self {
            Duty::Guard(f) | Duty::Patrol(f) => f,
        }
    }
}

/// Sends the nearest free drone to each field with birds, keeps it there
/// while the birds stay, and lets spare drones patrol the least recently
/// visited fields.
#[derive(Debug, Clone, Default)]
pub struct FarmBaseline {
    duties: BTreeMap<String, Duty>,
    last_visit: BTreeMap<usize, usize>,
}

struct FieldView {
    position: i64,
    birds: i64,
}

impl AdaptationManager for FarmBaseline {
    fn invoke(&mut self, req: &AssignRequest) -> Result<AssignResponse, HostError> {
        let mut fields = Vec::new();
        while let Some(attrs) = req.beyond_control.get(&format!("field{}", fields.len())) {
            fields.push(FieldView {
                position: attr_num(Some(attrs), "position") as i64,
                birds: attr_num(Some(attrs), "birds") as i64,
            });
        }
        if fields.is_empty() {
            return assign(req.components.iter().map(|c| (c.id.clone(), "idle")).collect());
        }
        let position = |c: &ComponentView| c.attrs.get("position").and_then(Value::as_f64).unwrap_or(0.0) as i64;
        let ids: BTreeSet<&str> = req.components.iter().map(|c| c.id.as_str()).collect();
        self.duties.retain(|id, _| ids.contains(id.as_str()));

        // finish or release duties
        for c in &req.components {
            let Some(duty) = self.duties.get(&c.id).copied() else { continue };
            let f = duty.field();
            let arrived = position(c) == fields[f].position;
            if arrived {
                self.last_visit.insert(f, req.step);
            }
            let next = match duty {
                _ if fields[f].birds > 0 => Some(Duty::Guard(f)),
                Duty::Guard(_) | Duty::Patrol(_) if arrived => None,
                Duty::Guard(_) => Some(duty),
                Duty::Patrol(_) => Some(duty),
            };
            match next {
                Some(d) => {
                    self.duties.insert(c.id.clone(), d);
                }
                None => {
                    self.duties.remove(&c.id);
                }
            }
        }

        // every field with birds gets a guard
        let guarded: BTreeSet<usize> = self
            .duties
            .values()
            .filter_map(|d| match d {
                Duty::Guard(f) => Some(*f),
                Duty::Patrol(_) => None,
            })
            .collect();
        let mut needy: Vec<usize> = (0..fields.len())
            .filter(|f| fields[*f].birds > 0 && !guarded.contains(f))
            .collect();
        needy.sort_by_key(|f| (-fields[*f].birds, *f));
        for f in needy {
            let best = req
                .components
                .iter()
                .filter(|c| !matches!(self.duties.get(&c.id), Some(Duty::Guard(_))))
                .min_by_key(|c| ((position(c) - fields[f].position).abs(), c.id.clone()));
            if let Some(c) = best {
                self.duties.insert(c.id.clone(), Duty::Guard(f));
            }
        }

        // spare drones patrol
        for c in &req.components {
            if self.duties.contains_key(&c.id) {
                continue;
            }
            let taken: BTreeSet<usize> = self.duties.values().map(|d| d.field()).collect();
            let f = (0..fields.len())
                .filter(|f| !taken.contains(f))
                .min_by_key(|f| {
                    (
                        self.last_visit.get(f).copied().map_or(-1, |s| s as i64),
                        (position(c) - fields[*f].position).abs(),
                        *f,
                    )
                })
                .unwrap_or(0);
            self.duties.insert(c.id.clone(), Duty::Patrol(f));
        }

        Ok(AssignResponse::Assignments(
            req.components
                .iter()
                .map(|c| (c.id.clone(), format!("protect field{}", self.duties[&c.id].field())))
                .collect(),
        ))
    }
}
