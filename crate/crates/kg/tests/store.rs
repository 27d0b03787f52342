mod support;

use proptest::prelude::*;
use proptest::test_runner::Config;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scdm_kg::{parse_turtle_star, serialize_turtle_star, Graph, Iri, Prefixes, Term, Triple};

fn prefixes() -> Prefixes {
    Prefixes::new()
        .with("", support::gen::NS)
        .with("xsd", "http://www.w3.org/2001/XMLSchema#")
}

#[test]
fn serialize_then_parse_is_a_fixpoint_on_100_stores() {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = support::gen::random_graph(&mut rng, 400);
        let text = serialize_turtle_star(&g, &prefixes());
        let back = parse_turtle_star(&text).unwrap();
        assert_eq!(back, g, "seed {seed}");
        assert_eq!(serialize_turtle_star(&back, &prefixes()), text, "seed {seed}");
    }
}

#[test]
fn strings_with_escapes_survive() {
    let mut g = Graph::new();
    for s in ["tab\there", "quote\"d", "back\\slash", "line\nbreak", "ünï", ""] {
        g.insert(Triple::new(Term::iri("http://t.example/x"), Iri::new("http://t.example/p"), Term::string(s)).unwrap());
    }
    g.insert(Triple::new(Term::iri("http://t.example/x"), Iri::new("http://t.example/d"), Term::double(-1.5e-7)).unwrap());
    g.insert(Triple::new(Term::iri("http://t.example/x"), Iri::new("http://t.example/d"), Term::double(1e21)).unwrap());
    let text = serialize_turtle_star(&g, &prefixes());
    assert_eq!(parse_turtle_star(&text).unwrap(), g);
}

fn config(cases: u32) -> Config {
    Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn indexes_stay_consistent_under_interleaved_edits(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<Triple> = support::gen::random_graph(&mut rng, 300).iter().collect();
        let mut g = Graph::new();
        let mut model = std::collections::BTreeSet::new();
        for _ in 0..1000 {
            let t = pool[rng.gen_range(0..pool.len())].clone();
            if rng.gen_bool(0.6) {
                prop_assert_eq!(g.insert(t.clone()), model.insert(t));
            } else {
                prop_assert_eq!(g.remove(&t), model.remove(&t));
            }
        }
        prop_assert!(g.audit().is_ok());
        prop_assert_eq!(g.len(), model.len());
        let all: std::collections::BTreeSet<Triple> = g.iter().collect();
        prop_assert_eq!(all, model);
    }

    #[test]
    fn every_lookup_shape_agrees_with_a_scan(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = support::gen::random_graph(&mut rng, 300);
        let all: Vec<Triple> = g.iter().collect();
        let probe = &all[rng.gen_range(0..all.len())];
        for mask in 0..8u8 {
            let s = (mask & 1 != 0).then(|| probe.subject());
            let p = (mask & 2 != 0).then(|| probe.predicate());
            let o = (mask & 4 != 0).then(|| probe.object());
            let mut got: Vec<Triple> = g.lookup(s, p, o).collect();
            got.sort();
            let want: Vec<Triple> = all
                .iter()
                .filter(|t| s.is_none_or(|x| x == t.subject())
                    && p.is_none_or(|x| x == t.predicate())
                    && o.is_none_or(|x| x == t.object()))
                .cloned()
                .collect();
            let mut want = want;
            want.sort();
            prop_assert!(g.estimate(s, p, o) >= 1 || want.is_empty());
            prop_assert_eq!(got, want);
        }
    }
}

#[test]
fn ten_thousand_inserts_pass_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut g = Graph::new();
    for _ in 0..10 {
        g.extend(support::gen::random_graph(&mut rng, 1000).iter());
    }
    assert!(g.len() > 1000);
    g.audit().unwrap();
}
