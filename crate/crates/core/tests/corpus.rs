use std::path::PathBuf;

use fclcas::adsl::{parse_adsl, render_adsl};
use fclcas::fcdsl::{parse_constraints, render, validate};
use fclcas::online::{classify, Shape};
use fclcas::testgen::random_constraint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn asset(rel: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn constraint_files_round_trip() {
    for file in ["constraints/dragon.fcl", "constraints/dragon_spawn_every_10.fcl", "constraints/farm.fcl"] {
        let doc = parse_constraints(&asset(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        let again = parse_constraints(&render(&doc.constraints)).unwrap();
        assert_eq!(doc.constraints, again.constraints, "{file}");
        for c in &doc.constraints {
            assert!(classify(c).is_ok(), "{file}: {} -> {:?}", c.description, classify(c));
        }
    }
}

#[test]
fn dragon_shapes() {
    let doc = parse_constraints(&asset("constraints/dragon.fcl")).unwrap();
    let shapes: Vec<Shape> = doc.constraints.iter().map(|c| classify(c).unwrap()).collect();
    assert_eq!(doc.constraints.len(), 8);
    assert_eq!(shapes[6], Shape::Triggered);
    assert_eq!(shapes[0], Shape::Eventual);
}

#[test]
fn specs_round_trip_and_validate() {
    for (file, fcl) in [("specs/dragon.adsl", "constraints/dragon.fcl"), ("specs/farm.adsl", "constraints/farm.fcl")] {
        let spec = parse_adsl(&asset(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        spec.validate().unwrap();
        let text = render_adsl(&spec);
        let again = parse_adsl(&text).unwrap_or_else(|e| panic!("{file} rendered: {e}\n{text}"));
        assert_eq!(spec, again);
        let doc = parse_constraints(&asset(fcl)).unwrap();
        let attrs = spec.attribute_names();
        validate(&doc.constraints, &spec.vocabulary(), Some(&attrs)).unwrap();
    }
}

proptest! {
    #[test]
    fn rendered_constraints_parse_back(seed in any::<u64>(), count in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let constraints: Vec<_> = (0..count).map(|k| random_constraint(&mut rng, k)).collect();
        let text = render(&constraints);
        let back = parse_constraints(&text).unwrap().constraints;
        prop_assert_eq!(&back, &constraints, "{}", text);
        prop_assert_eq!(render(&back), text);
    }
}
