mod support;

use std::collections::BTreeMap;

use diverse_cq_core::engine::{enumerate_answers, provenance_map, DEFAULT_EXTENSION_LIMIT};
use diverse_cq_core::optimize::{
    brute_force_diversify, cqnext_naive, cqnext_provenance, cqnext_tropical, greedy_combined, greedy_diversify,
    CombinedMode, Mode, DEFAULT_MAX_SUBSETS,
};
use diverse_cq_core::query::{free_connex_join_tree, parse_cq};
use diverse_cq_core::volume::{GroundPoint, Measure, VolumeAssignment};
use diverse_cq_core::{Database, Error, Rational, Tuple};
use rand::Rng;
use support::{props, random_acq, random_database, rng, AcqSpec};

fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

fn edges(pairs: &[(&str, &str)]) -> Database {
    Database::from_tuples(pairs.iter().map(|(a, b)| Tuple::parse("E", &[a, b]))).unwrap()
}

#[test]
fn greedy_stays_within_the_approximation_bound() {
    let mut g = rng(51);
    for _ in 0..40 {
        props::greedy_guarantee(&mut g, 1e-9).unwrap();
    }
}

#[test]
fn tropical_retrieval_matches_a_full_scan() {
    let mut g = rng(52);
    for _ in 0..100 {
        props::tropical_matches_naive(&mut g).unwrap();
    }
}

#[test]
fn provenance_retrieval_matches_a_full_scan() {
    let mut g = rng(53);
    let mut checked = 0;
    while checked < 50 {
        if let Some(outcome) = props::provenance_matches_naive(&mut g) {
            outcome.unwrap();
            checked += 1;
        }
    }
}

#[test]
fn combined_greedy_matches_materialized_greedy() {
    let mut g = rng(54);
    for i in 0..50 {
        let spec = AcqSpec { max_atoms: 4, max_arity: 3, self_join_free: i % 2 == 0, head_ratio: 0.7 };
        let q = random_acq(&mut g, &spec);
        let d = random_database(&mut g, &q, 20, 4);
        let answers = enumerate_answers(&q, &d).unwrap().answers;
        let k = g.random_range(0..=5);
        let v = VolumeAssignment::pos();
        let materialized = greedy_diversify(&answers, k, &v).unwrap();
        let combined = greedy_combined(&q, &d, k, CombinedMode::Tropical(&v), None).unwrap();
        assert_eq!(combined.total, materialized.total, "{q}");
        assert_eq!(combined.selected, materialized.selected, "{q}");
        assert_eq!(combined.mode, Mode::GreedyCombined);
        let naive = greedy_combined(&q, &d, k, CombinedMode::Naive(&v), None).unwrap();
        assert_eq!(naive.selected, materialized.selected);
        if q.is_self_join_free() && free_connex_join_tree(&q).is_ok() {
            let pv = VolumeAssignment::provenance(provenance_map(&q, &d, &answers, DEFAULT_EXTENSION_LIMIT).unwrap());
            let materialized = greedy_diversify(&answers, k, &pv).unwrap();
            let combined = greedy_combined(&q, &d, k, CombinedMode::Provenance, None).unwrap();
            assert_eq!(combined.selected, materialized.selected, "{q}");
        }
    }
}

#[test]
fn walk_volume_counts_distinct_vertices() {
    let q = parse_cq("Q(x1,x2,x3,x4) <- E(x1,x2), E(x2,x3), E(x3,x4).").unwrap();
    let d = edges(&[("1", "2"), ("2", "1"), ("2", "3"), ("3", "4")]);
    let best = cqnext_naive(&q, &d, &[], &VolumeAssignment::elem()).unwrap().unwrap();
    assert_eq!(best.marginal, int(4));
    assert_eq!(best.answer, Tuple::parse("Q", &["1", "2", "3", "4"]));
}

#[test]
fn everything_covered_gives_zero_marginal() {
    let q = parse_cq("Q(x,y) <- E(x,y).").unwrap();
    let d = edges(&[("a", "b"), ("b", "c")]);
    let all = enumerate_answers(&q, &d).unwrap().answers;
    let v = VolumeAssignment::pos();
    let next = cqnext_tropical(&q, None, &d, &all, &v).unwrap().unwrap();
    assert_eq!(next.marginal, int(0));
    assert!(all.contains(&next.answer));
}

#[test]
fn weighted_positions_steer_the_choice() {
    let q = parse_cq("Q(x,y) <- E(x,y).").unwrap();
    let d = edges(&[("a", "b"), ("a", "c")]);
    let w: BTreeMap<_, _> = [(GroundPoint::PosValue(Tuple::parse("E", &["c"]).values[0].clone(), 2), int(3))].into();
    let v = VolumeAssignment::pos_weighted(Measure::weighted(w, int(1)).unwrap());
    let next = cqnext_tropical(&q, None, &d, &[], &v).unwrap().unwrap();
    assert_eq!(next.answer, Tuple::parse("Q", &["a", "c"]));
    assert_eq!(next.marginal, int(4));
}

#[test]
fn provenance_maximizer_of_the_exposed_two_hop_query() {
    let q = parse_cq("Q(x,z,y) <- R(x,z), S(z,y).").unwrap();
    let rows = [("a", "a"), ("a", "b"), ("b", "a")];
    let d = Database::from_tuples(
        rows.iter()
            .flat_map(|(a, b)| [Tuple::parse("R", &[a, b]), Tuple::parse("S", &[a, b])]),
    )
    .unwrap();
    let first = cqnext_provenance(&q, None, &d, &[]).unwrap().unwrap();
    assert_eq!(first.marginal, int(2));
    let second = cqnext_provenance(&q, None, &d, std::slice::from_ref(&first.answer)).unwrap().unwrap();
    let answers = enumerate_answers(&q, &d).unwrap().answers;
    let v = VolumeAssignment::provenance(provenance_map(&q, &d, &answers, DEFAULT_EXTENSION_LIMIT).unwrap());
    assert_eq!(second.marginal, v.marginal(std::slice::from_ref(&first.answer), &second.answer).unwrap());
    assert_ne!(second.answer, first.answer);
}

#[test]
fn engines_reject_incompatible_inputs() {
    let q = parse_cq("Q(x,z) <- R(x,y), S(y,z).").unwrap();
    let d = Database::from_tuples([Tuple::parse("R", &["a", "b"]), Tuple::parse("S", &["b", "c"])]).unwrap();
    assert!(matches!(cqnext_provenance(&q, None, &d, &[]), Err(Error::NotFreeConnex)));
    let self_join = parse_cq("Q(x,y) <- R(x,y), R(y,x).").unwrap();
    assert!(matches!(cqnext_provenance(&self_join, None, &d, &[]), Err(Error::NotSelfJoinFree)));
    let elem = VolumeAssignment::elem();
    assert!(matches!(
        greedy_combined(&q, &d, 2, CombinedMode::Tropical(&elem), None),
        Err(Error::IncompatiblePairing(_))
    ));
    let triangle = parse_cq("Q(x,y,z) <- R(x,y), S(y,z), T(z,x).").unwrap();
    assert!(matches!(cqnext_tropical(&triangle, None, &d, &[], &VolumeAssignment::pos()), Err(Error::NotAcyclic)));
}

#[test]
fn exact_mode_returns_everything_when_k_is_large() {
    let answers: Vec<Tuple> = ["a", "b", "c"].iter().map(|x| Tuple::parse("Q", &[x])).collect();
    let r = brute_force_diversify(&answers, 10, &VolumeAssignment::elem(), DEFAULT_MAX_SUBSETS).unwrap();
    assert_eq!(r.selected, answers);
    assert_eq!(r.total, int(3));
    assert!(r.optimal);
    let capped = brute_force_diversify(&answers, 2, &VolumeAssignment::elem(), 2);
    assert!(matches!(capped, Err(Error::CapExceeded { .. })));
}

#[test]
fn k_zero_selects_nothing() {
    let q = parse_cq("Q(x,y) <- E(x,y).").unwrap();
    let d = edges(&[("a", "b")]);
    let v = VolumeAssignment::pos();
    for mode in [CombinedMode::Naive(&v), CombinedMode::Tropical(&v), CombinedMode::Provenance] {
        let r = greedy_combined(&q, &d, 0, mode, None).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.total, int(0));
    }
}
