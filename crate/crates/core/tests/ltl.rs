//! The `within` encodings of next/future/globally against a plain LTLf
//! evaluator written from the textbook definitions.

use fclcas::fcdsl::parse_formula;
use fclcas::fcl::{eval_offline, eval_state, ltl_bridge, Constraint, LtlOp, Trace};
use fclcas::testgen::{random_trace, vocabulary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

enum Ltl {
    Atom,
    Not(Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    True,
}

fn holds(f: &Ltl, atom: &[bool], i: usize) -> bool {
    match f {
        Ltl::True => true,
        Ltl::Atom => atom[i],
        Ltl::Not(g) => !holds(g, atom, i),
        // strong next: there must be a next position
        Ltl::Next(g) => i + 1 < atom.len() && holds(g, atom, i + 1),
        Ltl::Until(a, b) => (i..atom.len()).any(|k| holds(b, atom, k) && (i..k).all(|j| holds(a, atom, j))),
    }
}

fn eventually(f: Ltl) -> Ltl {
    Ltl::Until(Box::new(Ltl::True), Box::new(f))
}

fn always(f: Ltl) -> Ltl {
    Ltl::Not(Box::new(eventually(Ltl::Not(Box::new(f)))))
}

fn weak_next(f: Ltl) -> Ltl {
    Ltl::Not(Box::new(Ltl::Next(Box::new(Ltl::Not(Box::new(f))))))
}

const ATOMS: [&str; 4] = [
    "count(Attack) >= 1",
    "exists v in Villagers: v.location == \"Cave\"",
    "count(Farm union SpawnFarmer) < 2",
    "forall d in Dragons: d.hp > 3",
];

#[test]
fn bridge_matches_ltlf() {
    let vocab = vocabulary();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for round in 0..500 {
        let len = rand::Rng::gen_range(&mut rng, 1..=25);
        let trace: Trace = random_trace(&mut rng, len);
        let src = ATOMS[round % ATOMS.len()];
        let phi = parse_formula(src).unwrap();
        let atom: Vec<bool> = trace
            .snapshots()
            .iter()
            .map(|s| eval_state(&phi, s, &Vec::new(), &[], &vocab, Some(len)).unwrap())
            .collect();
        for (op, reference) in [
            (LtlOp::Next, Ltl::Next(Box::new(Ltl::Atom))),
            (LtlOp::Future, Ltl::Next(Box::new(eventually(Ltl::Atom)))),
            (LtlOp::Globally, weak_next(always(Ltl::Atom))),
        ] {
            let c = Constraint::new("bridge", ltl_bridge(op, phi.clone()));
            let got = eval_offline(&c, &trace, &vocab).unwrap().holds();
            assert_eq!(got, holds(&reference, &atom, 0), "round {round} {op:?} {src} over {atom:?}");
        }
    }
}
