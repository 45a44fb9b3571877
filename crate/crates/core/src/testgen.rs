//! Random traces and constraints for property tests and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::fcl::{
    ArithOp, Bound, CmpOp, Component, Constraint, Endcount, Expr, Formula, SetExpr, Snapshot, Trace, Value,
    Vocabulary,
};

pub const ENSEMBLES: [&str; 7] = [
    "Farm",
    "GoToCave",
    "SpawnFarmer",
    "SpawnWarrior",
    "Attack",
    "StayInCave",
    "GoToVillage",
];

pub fn vocabulary() -> Vocabulary {
    let mut v = Vocabulary::new()
        .with_component_type("Villager")
        .with_component_type("Dragon");
    for e in ENSEMBLES {
        v.add_ensemble(e);
    }
    v
}

/// A trace over villagers `v1..v6` and a dragon. Villagers are born and die
/// at random steps; ensemble memberships and attributes are random.
pub fn random_trace(rng: &mut impl Rng, len: usize) -> Trace {
    assert!(len >= 1);
    let villagers: Vec<(String, &str, usize, usize)> = (1..=6)
        .map(|k| {
            let born = if rng.gen_bool(0.6) { 0 } else { rng.gen_range(0..len) };
            let dies = if rng.gen_bool(0.7) { len } else { rng.gen_range(born + 1..=len) };
            let role = if rng.gen_bool(0.5) { "Farmer" } else { "Warrior" };
            (format!("v{k}"), role, born, dies)
        })
        .collect();
    let mut dragon_hp: i64 = rng.gen_range(0..12);
    let mut snapshots = Vec::with_capacity(len);
    for step in 0..len {
        let mut s = Snapshot::new(step);
        for e in ENSEMBLES {
            s.ensembles.insert(e.to_string(), Default::default());
        }
        s.components.insert(
            "dragon".into(),
            Component::new("Dragon").with("hp", Value::Int(dragon_hp)),
        );
        for (id, role, born, dies) in &villagers {
            if step < *born || step >= *dies {
                continue;
            }
            let location = if rng.gen_bool(0.5) { "Village" } else { "Cave" };
            s.components.insert(
                id.clone(),
                Component::new("Villager")
                    .with("role", *role)
                    .with("hp", Value::Int(rng.gen_range(1..7)))
                    .with("location", location),
            );
            if step > 0 && rng.gen_bool(0.8) {
                let e = ENSEMBLES.choose(rng).unwrap();
                s.ensembles.get_mut(*e).unwrap().insert(id.clone());
            }
        }
        snapshots.push(s);
        dragon_hp -= rng.gen_range(0..3);
    }
    Trace::new(snapshots).expect("generated trace is contiguous")
}

fn lit(v: i64) -> Expr {
    Expr::Lit(Value::Int(v))
}

fn cmp_op(rng: &mut impl Rng) -> CmpOp {
    *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]
        .choose(rng)
        .unwrap()
}

fn ensemble(rng: &mut impl Rng) -> SetExpr {
    SetExpr::named(*ENSEMBLES.choose(rng).unwrap())
}

fn set(rng: &mut impl Rng, depth: u32) -> SetExpr {
    match rng.gen_range(0..if depth == 0 { 2 } else { 5 }) {
        0 => ensemble(rng),
        1 => SetExpr::named("Villagers"),
        2 => SetExpr::Intersect(Box::new(set(rng, depth - 1)), Box::new(set(rng, depth - 1))),
        3 => SetExpr::Union(Box::new(set(rng, depth - 1)), Box::new(set(rng, depth - 1))),
        _ => SetExpr::Comprehension {
            var: "u".into(),
            source: Box::new(SetExpr::named("Villagers")),
            predicate: Box::new(villager_atom(rng, "u")),
        },
    }
}

/// An atom about the villager bound to `var`.
fn villager_atom(rng: &mut impl Rng, var: &str) -> Formula {
    let v = || Expr::Var(var.to_string());
    match rng.gen_range(0..4) {
        0 => Formula::In(v(), ensemble(rng)),
        1 => Formula::Cmp(Expr::Attr(Box::new(v()), "hp".into()), cmp_op(rng), lit(rng.gen_range(0..7))),
        2 => Formula::Cmp(
            Expr::Attr(Box::new(v()), "role".into()),
            CmpOp::Eq,
            Expr::Lit(Value::Str("Farmer".into())),
        ),
        _ => Formula::Cmp(
            Expr::Attr(Box::new(v()), "location".into()),
            CmpOp::Eq,
            Expr::Lit(Value::Str("Cave".into())),
        ),
    }
}

/// A closed state atom.
fn closed_atom(rng: &mut impl Rng) -> Formula {
    match rng.gen_range(0..5) {
        0 | 1 => Formula::Cmp(Expr::Count(set(rng, 2)), cmp_op(rng), lit(rng.gen_range(0..4))),
        2 => Formula::Cmp(
            Expr::Count(set(rng, 1)),
            CmpOp::Ge,
            Expr::Arith(ArithOp::Mul, Box::new(Expr::Lit(Value::Real(0.5))), Box::new(Expr::Count(set(rng, 1)))),
        ),
        3 => Formula::Exists("x".into(), set(rng, 1), Box::new(villager_atom(rng, "x"))),
        _ => Formula::Forall("y".into(), ensemble(rng), Box::new(villager_atom(rng, "y"))),
    }
}

fn atom(rng: &mut impl Rng, var: Option<&str>) -> Formula {
    match var {
        Some(v) if rng.gen_bool(0.6) => villager_atom(rng, v),
        _ => closed_atom(rng),
    }
}

fn state_formula(rng: &mut impl Rng, var: Option<&str>, depth: u32) -> Formula {
    if depth == 0 {
        return atom(rng, var);
    }
    match rng.gen_range(0..5) {
        0 => Formula::and(state_formula(rng, var, depth - 1), state_formula(rng, var, depth - 1)),
        1 => Formula::or(state_formula(rng, var, depth - 1), state_formula(rng, var, depth - 1)),
        2 => Formula::not(state_formula(rng, var, depth - 1)),
        _ => atom(rng, var),
    }
}

fn count_bound(rng: &mut impl Rng) -> Bound {
    match rng.gen_range(0..8) {
        0 => Bound::Max,
        1 => Bound::Scaled {
            factor: *[0.5, 0.8, 0.25].choose(rng).unwrap(),
            endcount: Endcount::Max,
        },
        2 => Bound::Beg,
        _ => Bound::Lit(rng.gen_range(0..4)),
    }
}

fn forward_pair(rng: &mut impl Rng) -> (Bound, Bound) {
    match rng.gen_range(0..10) {
        0 => (Bound::Inf, Bound::Inf),
        1 => (Bound::Max, Bound::Max),
        2 => (Bound::Lit(1), Bound::Inf),
        3 | 4 => (count_bound(rng), Bound::Max),
        _ => (Bound::Lit(rng.gen_range(0..4)), Bound::Lit(rng.gen_range(0..8))),
    }
}

fn backward(rng: &mut impl Rng) -> Formula {
    let k = rng.gen_range(1..6);
    let n = if rng.gen_bool(0.3) { Bound::Lit(k) } else { Bound::Lit(rng.gen_range(0..=k)) };
    Formula::within(n, Bound::Lit(-k), state_formula(rng, None, 1))
}

fn guard(rng: &mut impl Rng) -> Formula {
    let op = if rng.gen_bool(0.5) { CmpOp::Gt } else { CmpOp::Ge };
    Formula::Cmp(Expr::Endcount(Endcount::Max), op, lit(rng.gen_range(0..4)))
}

fn antecedent(rng: &mut impl Rng, var: Option<&str>) -> Formula {
    let base = state_formula(rng, var, 1);
    match rng.gen_range(0..4) {
        0 => Formula::and(base, guard(rng)),
        1 => Formula::and(backward(rng), base),
        2 => backward(rng),
        _ => base,
    }
}

/// A constraint inside the online-checkable subset.
pub fn random_constraint(rng: &mut impl Rng, index: usize) -> Constraint {
    loop {
        let var = rng.gen_bool(0.5).then_some("v");
        let matrix = match rng.gen_range(0..3) {
            0 => {
                let (n, t) = forward_pair(rng);
                Formula::within(n, t, state_formula(rng, var, 2))
            }
            1 => {
                let (n, t) = forward_pair(rng);
                Formula::implies(antecedent(rng, var), Formula::within(n, t, state_formula(rng, var, 2)))
            }
            _ => {
                if rng.gen_bool(0.5) {
                    Formula::implies(antecedent(rng, var), state_formula(rng, var, 1))
                } else {
                    state_formula(rng, var, 2)
                }
            }
        };
        let body = match var {
            Some(v) => {
                let domain = if rng.gen_bool(0.7) { SetExpr::named("Villagers") } else { ensemble(rng) };
                Formula::forall(v, domain, matrix)
            }
            None => matrix,
        };
        let c = Constraint::new(format!("random constraint {index}"), body);
        if c.is_online_checkable() {
            return c;
        }
    }
}
