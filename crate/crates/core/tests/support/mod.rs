//! Seeded generators of random instances shared by the test suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use diverse_cq_core::baselines::{UltrametricNode, UltrametricTree};
use diverse_cq_core::engine::{enumerate_answers, provenance_map, DEFAULT_EXTENSION_LIMIT};
use diverse_cq_core::query::{parse_cq, ConjunctiveQuery};
use diverse_cq_core::volume::{GroundPoint, Measure, Region, VolumeAssignment};
use diverse_cq_core::{DataValue, Database, Rational, Schema, Tuple};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn value(i: usize) -> DataValue {
    DataValue::Text(format!("v{i}").into())
}

/// A query rendered as text; atoms are `(relation, variables)`.
pub fn render(head: &[String], body: &[(String, Vec<String>)]) -> String {
    let atoms: Vec<String> = body.iter().map(|(r, vs)| format!("{r}({})", vs.join(","))).collect();
    format!("Q({}) <- {}.", head.join(","), atoms.join(", "))
}

/// Arbitrary queries over relations `R0..R2` (arity 1..=3 by name), possibly
/// cyclic, with repeated variables allowed.
pub fn random_query(rng: &mut ChaCha8Rng, max_atoms: usize) -> ConjunctiveQuery {
    let atoms = rng.random_range(1..=max_atoms);
    let vars = rng.random_range(1..=5);
    let body: Vec<(String, Vec<String>)> = (0..atoms)
        .map(|_| {
            let r = rng.random_range(0..3usize);
            let arity = r + 1;
            (format!("R{r}"), (0..arity).map(|_| format!("x{}", rng.random_range(0..vars))).collect())
        })
        .collect();
    let used: Vec<String> = body
        .iter()
        .flat_map(|(_, v)| v.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let head: Vec<String> = used.iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
    parse_cq(&render(&head, &body)).expect("generated query parses")
}

pub struct AcqSpec {
    pub max_atoms: usize,
    pub max_arity: usize,
    pub self_join_free: bool,
    /// Probability that a variable is kept in the head.
    pub head_ratio: f64,
}

/// An acyclic query grown as a join tree: each new atom shares some
/// variables of an earlier atom and adds fresh ones. With self joins,
/// atoms of equal arity may reuse one relation name.
pub fn random_acq(rng: &mut ChaCha8Rng, spec: &AcqSpec) -> ConjunctiveQuery {
    let atoms = rng.random_range(1..=spec.max_atoms);
    let mut next_var = 0;
    let fresh = |n: &mut usize| {
        *n += 1;
        format!("x{}", *n - 1)
    };
    let mut body: Vec<(String, Vec<String>)> = Vec::new();
    for i in 0..atoms {
        let arity = rng.random_range(1..=spec.max_arity);
        let mut vars: Vec<String> = Vec::new();
        if i > 0 {
            let parent = &body[rng.random_range(0..i)].1;
            let mut shared = parent.clone();
            shared.shuffle(rng);
            let take = rng.random_range(0..=shared.len().min(arity));
            vars.extend(shared.into_iter().take(take));
        }
        while vars.len() < arity {
            vars.push(fresh(&mut next_var));
        }
        vars.shuffle(rng);
        let name = if spec.self_join_free {
            format!("R{i}")
        } else {
            format!("E{arity}_{}", rng.random_range(0..2))
        };
        body.push((name, vars));
    }
    let used: Vec<String> = body
        .iter()
        .flat_map(|(_, v)| v.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let head: Vec<String> = used.iter().filter(|_| rng.random_bool(spec.head_ratio)).cloned().collect();
    parse_cq(&render(&head, &body)).expect("generated query parses")
}

/// A database with every relation of `q`, filled with random rows over a
/// domain of `domain` values.
pub fn random_database(rng: &mut ChaCha8Rng, q: &ConjunctiveQuery, max_rows: usize, domain: usize) -> Database {
    let mut schema = Schema::new();
    for a in q.body() {
        if schema.arity(&a.relation).is_none() {
            schema.declare(&a.relation, a.vars.len()).unwrap();
        }
    }
    let mut b = Database::builder(schema.clone());
    for (name, arity) in schema.relations() {
        let rows = rng.random_range(0..=max_rows);
        for _ in 0..rows {
            let values = (0..arity).map(|_| value(rng.random_range(0..domain))).collect();
            b.insert(name, values).unwrap();
        }
    }
    b.build()
}

/// Random tuples of one relation over a small domain.
pub fn random_tuples(rng: &mut ChaCha8Rng, count: usize, arity: usize, domain: usize) -> Vec<Tuple> {
    let mut out = BTreeSet::new();
    let mut guard = 0;
    while out.len() < count && guard < count * 50 {
        guard += 1;
        out.insert(Tuple::new("R", (0..arity).map(|_| value(rng.random_range(0..domain))).collect()));
    }
    out.into_iter().collect()
}

pub fn random_rational(rng: &mut ChaCha8Rng, max: i128) -> Rational {
    Rational::new(rng.random_range(0..=max * 4), 4)
}

/// All subsets of `items` as index masks, the empty set excluded.
pub fn subsets<T: Clone>(items: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    (1u32..(1 << items.len())).map(move |m| {
        (0..items.len()).filter(|i| m & (1 << i) != 0).map(|i| items[i].clone()).collect()
    })
}

/// Weights over value points (or positional points when `positional`) for
/// the first `domain` values; unlisted points keep a random default.
pub fn random_measure(rng: &mut ChaCha8Rng, domain: usize, arity: usize, positional: bool) -> Measure {
    let mut w = BTreeMap::new();
    for i in 0..domain {
        if positional {
            for p in 1..=arity as u32 {
                if rng.random_bool(0.7) {
                    w.insert(GroundPoint::PosValue(value(i), p), random_rational(rng, 5));
                }
            }
        } else if rng.random_bool(0.7) {
            w.insert(GroundPoint::Value(value(i)), random_rational(rng, 5));
        }
    }
    Measure::weighted(w, random_rational(rng, 3)).unwrap()
}

/// Balls drawn at random from a pool of `points` value points.
pub fn random_table(rng: &mut ChaCha8Rng, universe: &[Tuple], points: usize) -> VolumeAssignment {
    let balls = universe
        .iter()
        .map(|t| {
            let region = Region::from_points(
                (0..points).filter(|_| rng.random_bool(0.35)).map(|i| GroundPoint::Value(value(i))),
            );
            (t.clone(), region)
        })
        .collect();
    let measure = if rng.random_bool(0.5) {
        Measure::Count
    } else {
        random_measure(rng, points, 1, false)
    };
    VolumeAssignment::table("random", balls, measure)
}

/// One instance of every discrete built-in assignment kind together with
/// a universe of tuples it is defined on.
pub fn random_discrete_assignments(rng: &mut ChaCha8Rng, max_count: usize) -> Vec<(VolumeAssignment, Vec<Tuple>)> {
    let arity = rng.random_range(1..=3);
    let domain = rng.random_range(2..=5);
    let count = rng.random_range(2..=max_count);
    let tuples = random_tuples(rng, count, arity, domain);
    let mut out = vec![
        (VolumeAssignment::elem(), tuples.clone()),
        (VolumeAssignment::pos(), tuples.clone()),
        (VolumeAssignment::elem_weighted(random_measure(rng, domain, arity, false)), tuples.clone()),
        (VolumeAssignment::pos_weighted(random_measure(rng, domain, arity, true)), tuples.clone()),
        (random_table(rng, &tuples, 6), tuples),
    ];
    let spec = AcqSpec { max_atoms: 3, max_arity: 2, self_join_free: rng.random_bool(0.5), head_ratio: 0.6 };
    loop {
        let q = random_acq(rng, &spec);
        let d = random_database(rng, &q, 8, 3);
        let answers = enumerate_answers(&q, &d).unwrap().answers;
        if (2..=max_count.max(2)).contains(&answers.len()) {
            let p = provenance_map(&q, &d, &answers, DEFAULT_EXTENSION_LIMIT).unwrap();
            out.push((VolumeAssignment::provenance(p), answers));
            return out;
        }
    }
}

/// A random subset of `items`.
pub fn random_subset<T: Clone>(rng: &mut ChaCha8Rng, items: &[T]) -> Vec<T> {
    items.iter().filter(|_| rng.random_bool(0.5)).cloned().collect()
}

/// An ultrametric tree over leaves `u0..` with integer heights below `height`.
pub fn random_ultrametric(rng: &mut ChaCha8Rng, leaves: usize, height: i128) -> UltrametricTree {
    let labels: Vec<String> = (0..leaves).map(|i| format!("u{i}")).collect();
    let root = grow(rng, &labels, height, height);
    UltrametricTree::new(&root).unwrap()
}

fn grow(rng: &mut ChaCha8Rng, labels: &[String], own: i128, parent: i128) -> UltrametricNode {
    let edge = Rational::from_integer(parent - own);
    if labels.len() == 1 {
        return UltrametricNode::leaf(&labels[0], Rational::from_integer(parent));
    }
    if own == 0 {
        let leaves = labels.iter().map(|l| UltrametricNode::leaf(l, Rational::from_integer(0))).collect();
        return UltrametricNode::inner(edge, leaves);
    }
    let parts = rng.random_range(2..=labels.len().min(3));
    let mut shuffled = labels.to_vec();
    shuffled.shuffle(rng);
    let mut groups: Vec<Vec<String>> = (0..parts).map(|i| vec![shuffled[i].clone()]).collect();
    for l in &shuffled[parts..] {
        groups[rng.random_range(0..parts)].push(l.clone());
    }
    let children = groups
        .iter()
        .map(|g| {
            let below = rng.random_range(0..own);
            grow(rng, g, below, own)
        })
        .collect();
    UltrametricNode::inner(edge, children)
}

pub mod props;
