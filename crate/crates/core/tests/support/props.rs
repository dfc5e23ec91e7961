//! Randomized property checks shared by the integration and acceptance
//! suites. Each returns the first counterexample found.

use diverse_cq_core::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{random_discrete_assignments, random_subset};

pub type Outcome = Result<(), String>;

/// Monotonicity and submodularity of every discrete assignment kind.
pub fn monotone_submodular(rng: &mut ChaCha8Rng) -> Outcome {
    for (v, universe) in random_discrete_assignments(rng, 8) {
        let s2 = random_subset(rng, &universe);
        let s1 = random_subset(rng, &s2);
        let t = &universe[rng.random_range(0..universe.len())];
        let mut with = s2.clone();
        with.push(t.clone());
        let before = v.diversity(&s2).unwrap();
        let after = v.diversity(&with).unwrap();
        if after < before {
            return Err(format!("{}: adding {t} to {s2:?} lowers {before} to {after}", v.name));
        }
        let m1 = v.marginal(&s1, t).unwrap();
        let m2 = v.marginal(&s2, t).unwrap();
        if m1 < m2 {
            return Err(format!("{}: marginal of {t} grows from {m1} to {m2}", v.name));
        }
        if m2 != after - before {
            return Err(format!("{}: marginal {m2} differs from difference {}", v.name, after - before));
        }
    }
    Ok(())
}

/// Symmetry, identity and triangle inequality of the symmetric-difference distance.
pub fn pseudo_metric(rng: &mut ChaCha8Rng) -> Outcome {
    for (v, universe) in random_discrete_assignments(rng, 8) {
        let pick = |rng: &mut ChaCha8Rng| universe[rng.random_range(0..universe.len())].clone();
        let (a, b, c) = (pick(rng), pick(rng), pick(rng));
        let d = |x, y| v.sym_diff_distance(x, y).unwrap();
        if d(&a, &a) != Rational::from_integer(0) {
            return Err(format!("{}: d({a},{a}) = {}", v.name, d(&a, &a)));
        }
        if d(&a, &b) != d(&b, &a) {
            return Err(format!("{}: d({a},{b}) is not symmetric", v.name));
        }
        if d(&a, &c) > d(&a, &b) + d(&b, &c) {
            return Err(format!("{}: triangle inequality fails on {a}, {b}, {c}", v.name));
        }
    }
    Ok(())
}

/// Diversity of two tuples with disjoint balls is the sum of their own.
pub fn disjoint_additivity(rng: &mut ChaCha8Rng) -> Outcome {
    for (v, universe) in random_discrete_assignments(rng, 8) {
        for a in &universe {
            for b in &universe {
                let (ba, bb) = (v.ball(a).unwrap(), v.ball(b).unwrap());
                if !ba.intersection(&bb).is_empty() {
                    continue;
                }
                let pair = v.diversity(&[a.clone(), b.clone()]).unwrap();
                let sum = v.diversity(std::slice::from_ref(a)).unwrap() + v.diversity(std::slice::from_ref(b)).unwrap();
                if pair != sum {
                    return Err(format!("{}: δ({{{a},{b}}}) = {pair}, singletons sum to {sum}", v.name));
                }
            }
        }
    }
    Ok(())
}

/// Both multi-attribute conversions agree with the brute-force value
/// `v_λ(S) = Σ { λ_A : A ∩ S ≠ ∅ }` on every non-empty subset.
pub fn multiattribute_round_trip(rng: &mut ChaCha8Rng, max_universe: usize) -> Outcome {
    use diverse_cq_core::volume::{
        multiattribute_from_volume, volume_from_multiattribute, MultiAttributeWeights, DEFAULT_UNIVERSE_CAP,
    };
    use std::collections::BTreeMap;

    let n = rng.random_range(1..=max_universe);
    let universe: Vec<_> = (0..n).map(|i| diverse_cq_core::baselines::element(&format!("x{i}"))).collect();
    let mut lambda = BTreeMap::new();
    for _ in 0..rng.random_range(0..=2 * n) {
        lambda.insert(rng.random_range(1u32..(1 << n)), super::random_rational(rng, 6));
    }
    let brute = |s_mask: u32| {
        lambda
            .iter()
            .filter(|(a, _)| **a & s_mask != 0)
            .fold(Rational::from_integer(0), |acc, (_, w)| acc + *w)
    };
    let maw = MultiAttributeWeights::new(universe.clone(), lambda.clone()).map_err(|e| e.to_string())?;
    let v = volume_from_multiattribute(&maw, DEFAULT_UNIVERSE_CAP).map_err(|e| e.to_string())?;
    for mask in 1u32..(1 << n) {
        let s: Vec<_> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| universe[i].clone()).collect();
        let (want, got) = (brute(mask), v.diversity(&s).unwrap());
        if want != got || maw.value(&s).unwrap() != want {
            return Err(format!("λ → volume: mask {mask:b} gives {got}, expected {want}"));
        }
    }
    for (v, universe) in random_discrete_assignments(rng, 8) {
        let universe: Vec<_> = universe.into_iter().take(max_universe).collect();
        let maw = multiattribute_from_volume(&v, &universe, DEFAULT_UNIVERSE_CAP).map_err(|e| e.to_string())?;
        let back = volume_from_multiattribute(&maw, DEFAULT_UNIVERSE_CAP).map_err(|e| e.to_string())?;
        for s in super::subsets(&universe) {
            let want = v.diversity(&s).unwrap();
            if maw.value(&s).unwrap() != want || back.diversity(&s).unwrap() != want {
                return Err(format!("{} → λ: {s:?} gives {}, expected {want}", v.name, maw.value(&s).unwrap()));
            }
        }
    }
    Ok(())
}

/// On a random ultrametric tree: `δ_V = δ_W + r` on all sets of at most
/// four leaves, and the tree formula equals the recursive definition on
/// sets of at most five.
pub fn ultrametric_equivalence(rng: &mut ChaCha8Rng, max_leaves: usize) -> Outcome {
    use diverse_cq_core::baselines::{
        element, ultrametric_to_volume, weitzman, weitzman_ultrametric, DistanceFn, DEFAULT_WEITZMAN_CAP,
    };

    let leaves = rng.random_range(1..=max_leaves);
    let tree = super::random_ultrametric(rng, leaves, 6);
    let v = ultrametric_to_volume(&tree);
    let d = DistanceFn::Ultrametric(tree.clone());
    let labels: Vec<String> = tree.labels().cloned().collect();
    for s in super::subsets(&labels).filter(|s| s.len() <= 5) {
        let tuples: Vec<_> = s.iter().map(|l| element(l)).collect();
        let recursive = weitzman(&tuples, &d, DEFAULT_WEITZMAN_CAP).unwrap();
        let fast = weitzman_ultrametric(&s, &tree).unwrap();
        if recursive != fast {
            return Err(format!("{s:?}: tree formula {fast}, recursion {recursive}"));
        }
        if s.len() <= 4 && v.diversity(&tuples).unwrap() != recursive + tree.radius() {
            return Err(format!("{s:?}: δ_V = {}, δ_W + r = {}", v.diversity(&tuples).unwrap(), recursive + tree.radius()));
        }
    }
    Ok(())
}

/// Greedy reaches `(1 − 1/e)` of the exhaustive optimum on one random
/// instance per discrete assignment kind; the plain and lazy variants agree.
pub fn greedy_guarantee(rng: &mut ChaCha8Rng, tolerance: f64) -> Outcome {
    use diverse_cq_core::optimize::{brute_force_diversify, greedy_diversify, greedy_diversify_plain, DEFAULT_MAX_SUBSETS};
    use diverse_cq_core::rational::to_f64;

    let ratio = 1.0 - (-1.0f64).exp();
    for (v, universe) in random_discrete_assignments(rng, 12) {
        let k = rng.random_range(1..=4);
        let greedy = greedy_diversify(&universe, k, &v).map_err(|e| e.to_string())?;
        let plain = greedy_diversify_plain(&universe, k, &v).map_err(|e| e.to_string())?;
        if greedy != plain {
            return Err(format!("{}: lazy greedy {:?} differs from plain {:?}", v.name, greedy.selected, plain.selected));
        }
        let opt = brute_force_diversify(&universe, k, &v, DEFAULT_MAX_SUBSETS).map_err(|e| e.to_string())?;
        if greedy.total != v.diversity(&greedy.selected).unwrap() {
            return Err(format!("{}: recorded total {} is not the diversity of the selection", v.name, greedy.total));
        }
        if to_f64(&greedy.total) < ratio * to_f64(&opt.total) - tolerance {
            return Err(format!("{}: greedy {} below (1-1/e) of optimum {}", v.name, greedy.total, opt.total));
        }
    }
    Ok(())
}

fn acq_instance(
    rng: &mut ChaCha8Rng,
    spec: &super::AcqSpec,
) -> (diverse_cq_core::query::ConjunctiveQuery, diverse_cq_core::Database, Vec<diverse_cq_core::Tuple>) {
    use diverse_cq_core::engine::enumerate_answers;
    let q = super::random_acq(rng, spec);
    let d = super::random_database(rng, &q, 30, 4);
    let answers = enumerate_answers(&q, &d).unwrap().answers;
    let s = answers.iter().filter(|_| rng.random_bool(0.2)).cloned().collect();
    (q, d, s)
}

/// Max-plus retrieval finds the same best marginal as a full scan under the
/// positional assignment, plain or weighted.
pub fn tropical_matches_naive(rng: &mut ChaCha8Rng) -> Outcome {
    use diverse_cq_core::optimize::{cqnext_naive, cqnext_tropical};
    use diverse_cq_core::volume::VolumeAssignment;

    let full = rng.random_bool(0.5);
    let spec = super::AcqSpec {
        max_atoms: 4,
        max_arity: 3,
        self_join_free: rng.random_bool(0.5),
        head_ratio: if full { 1.0 } else { 0.6 },
    };
    let (q, d, s) = acq_instance(rng, &spec);
    let v = if rng.random_bool(0.5) {
        VolumeAssignment::pos()
    } else {
        VolumeAssignment::pos_weighted(super::random_measure(rng, 4, 3, true))
    };
    let naive = cqnext_naive(&q, &d, &s, &v).map_err(|e| e.to_string())?;
    let fast = cqnext_tropical(&q, None, &d, &s, &v).map_err(|e| e.to_string())?;
    match (&naive, &fast) {
        (None, None) => Ok(()),
        (Some(n), Some(f)) if n.marginal == f.marginal => {
            if v.marginal(&s, &f.answer).unwrap() != f.marginal {
                return Err(format!("{q}: reported marginal {} of {} is wrong", f.marginal, f.answer));
            }
            Ok(())
        }
        _ => Err(format!("{q} with {}: naive {naive:?}, tropical {fast:?}", v.name)),
    }
}

/// Provenance retrieval over a free-connex tree finds the same best marginal
/// as a full scan under the provenance assignment. Returns `None` when the
/// drawn query is not free-connex.
pub fn provenance_matches_naive(rng: &mut ChaCha8Rng) -> Option<Outcome> {
    use diverse_cq_core::engine::{enumerate_answers, provenance_map, DEFAULT_EXTENSION_LIMIT};
    use diverse_cq_core::optimize::{cqnext_naive, cqnext_provenance};
    use diverse_cq_core::query::free_connex_join_tree;
    use diverse_cq_core::volume::VolumeAssignment;

    let spec = super::AcqSpec { max_atoms: 4, max_arity: 3, self_join_free: true, head_ratio: 0.6 };
    let (q, d, s) = acq_instance(rng, &spec);
    let fc = free_connex_join_tree(&q).ok()?;
    let answers = enumerate_answers(&q, &d).unwrap().answers;
    let v = VolumeAssignment::provenance(provenance_map(&q, &d, &answers, DEFAULT_EXTENSION_LIMIT).unwrap());
    let naive = match cqnext_naive(&q, &d, &s, &v) {
        Ok(n) => n,
        Err(e) => return Some(Err(e.to_string())),
    };
    let td = rng.random_bool(0.5).then_some(&fc.td);
    let fast = match cqnext_provenance(&q, td, &d, &s) {
        Ok(f) => f,
        Err(e) => return Some(Err(format!("{q}: {e}"))),
    };
    Some(match (&naive, &fast) {
        (None, None) => Ok(()),
        (Some(n), Some(f)) if n.marginal == f.marginal && v.marginal(&s, &f.answer).unwrap() == f.marginal => Ok(()),
        _ => Err(format!("{q}: naive {naive:?}, provenance {fast:?}")),
    })
}
