//! Top-1 retrieval of the answer with the largest marginal gain.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::greedy::{assert_non_increasing, greedy_diversify_plain, DiverseResult, Mode};
use super::maxplus::MaxPlusTree;
use super::objective::{Objective, Score};
use crate::engine::{enumerate_answers, ReducedTree};
use crate::error::{Error, Result};
use crate::query::{free_connex_join_tree, free_connex_subtree, gyo_join_tree, ConjunctiveQuery, FreeConnex, TreeDecomposition, VarId};
use crate::rational::Rational;
use crate::relcore::{DataValue, Database, Tuple};
use crate::volume::{Ball, GroundPoint, Region, VolumeAssignment};

/// An answer together with its marginal gain.
#[derive(Clone, Debug, PartialEq)]
pub struct NextAnswer<S> {
    pub answer: Tuple,
    pub marginal: S,
}

/// Scans every answer. Ties go to the smallest answer.
pub fn cqnext_naive<O: Objective>(
    q: &ConjunctiveQuery,
    d: &Database,
    s: &[Tuple],
    obj: &O,
) -> Result<Option<NextAnswer<O::Score>>> {
    let answers = enumerate_answers(q, d)?;
    let mut covered = obj.empty();
    for t in s {
        obj.cover(&mut covered, t)?;
    }
    let mut best: Option<NextAnswer<O::Score>> = None;
    for t in answers.iter() {
        let g = obj.gain(&covered, t)?;
        if best.as_ref().is_none_or(|b| g.compare(&b.marginal) == Ordering::Greater) {
            best = Some(NextAnswer {
                answer: t.clone(),
                marginal: g,
            });
        }
    }
    Ok(best)
}

fn head_values(q: &ConjunctiveQuery, answer: &Tuple) -> Result<BTreeMap<VarId, DataValue>> {
    let not_an_answer = || Error::NotAnAnswer(answer.to_string());
    if answer.relation != *q.name() || answer.values.len() != q.head().len() {
        return Err(not_an_answer());
    }
    let mut out = BTreeMap::new();
    for (v, val) in q.head().iter().zip(&answer.values) {
        if out.insert(*v, val.clone()).is_some_and(|prev| prev != *val) {
            return Err(not_an_answer());
        }
    }
    Ok(out)
}

fn distinct_head(q: &ConjunctiveQuery) -> Vec<VarId> {
    let mut seen = BTreeSet::new();
    q.head().iter().copied().filter(|v| seen.insert(*v)).collect()
}

fn answer_from(q: &ConjunctiveQuery, vars: &[VarId], values: &[DataValue]) -> Tuple {
    let map: BTreeMap<VarId, &DataValue> = vars.iter().copied().zip(values).collect();
    Tuple::new(q.name().clone(), q.head().iter().map(|v| map[v].clone()).collect())
}

/// Reusable state for max-plus retrieval under position-aware balls.
pub struct TropicalPlan<'q> {
    q: &'q ConjunctiveQuery,
    tree: ReducedTree<'q>,
    /// Node and column carrying the value of each head position.
    positions: Vec<(usize, usize)>,
}

impl<'q> TropicalPlan<'q> {
    /// Uses `td` when given, otherwise a GYO join tree. Each head position is
    /// scored at the node holding the first atom that mentions its variable.
    pub fn new(q: &'q ConjunctiveQuery, d: &Database, td: Option<&TreeDecomposition>) -> Result<Self> {
        let td = match td {
            Some(td) => td.clone(),
            None => gyo_join_tree(q)?,
        };
        let tree = ReducedTree::build(q, d, &td)?;
        let assignment = td.atom_assignment(q)?;
        let positions = q
            .head()
            .iter()
            .map(|&x| {
                let atom = (0..q.body().len())
                    .find(|&a| q.atom_vars(a).contains(&x))
                    .expect("head variables occur in the body");
                let node = assignment[atom];
                (node, tree.relation(node).column(x).expect("covering bag holds the variable"))
            })
            .collect();
        Ok(TropicalPlan { q, tree, positions })
    }

    fn scores(&self, v: &VolumeAssignment, covered: &Region) -> Vec<Vec<Rational>> {
        let zero = Rational::from_integer(0);
        let mut scores: Vec<Vec<Rational>> = self
            .tree
            .relations()
            .iter()
            .map(|r| alloc::vec![zero; r.len()])
            .collect();
        for (l, &(node, col)) in self.positions.iter().enumerate() {
            for (r, row) in self.tree.relation(node).rows().iter().enumerate() {
                let p = GroundPoint::PosValue(row[col].clone(), l as u32 + 1);
                if !covered.contains(&p) {
                    scores[node][r] += v.measure.point(&p);
                }
            }
        }
        scores
    }

    /// The best answer outside `exclude`; see [`MaxPlusTree::best`] for the
    /// contract on excluded answers.
    pub fn next(&self, v: &VolumeAssignment, covered: &Region, exclude: &BTreeSet<Tuple>) -> Result<Option<NextAnswer<Rational>>> {
        if v.ball != Ball::Pos {
            return Err(Error::IncompatiblePairing(
                "the tropical engine needs the pos or pos-w assignment; use the naive engine".into(),
            ));
        }
        let td = self.tree.td();
        let all: Vec<usize> = (0..td.len()).collect();
        let vars = distinct_head(self.q);
        let exclude = exclude_keys(self.q, &vars, exclude)?;
        let mp = MaxPlusTree::new(td, &all, self.tree.relations(), self.scores(v, covered));
        Ok(mp.best(&vars, &exclude).map(|(values, marginal)| NextAnswer {
            answer: answer_from(self.q, &vars, &values),
            marginal,
        }))
    }
}

fn exclude_keys(q: &ConjunctiveQuery, vars: &[VarId], exclude: &BTreeSet<Tuple>) -> Result<BTreeSet<Vec<DataValue>>> {
    exclude
        .iter()
        .map(|t| {
            let m = head_values(q, t)?;
            Ok(vars.iter().map(|v| m[v].clone()).collect())
        })
        .collect()
}

/// Max-plus retrieval of the answer with the most uncovered positional weight.
pub fn cqnext_tropical(
    q: &ConjunctiveQuery,
    td: Option<&TreeDecomposition>,
    d: &Database,
    s: &[Tuple],
    v: &VolumeAssignment,
) -> Result<Option<NextAnswer<Rational>>> {
    let plan = TropicalPlan::new(q, d, td)?;
    plan.next(v, &v.covered(s)?, &BTreeSet::new())
}

/// Reusable state for which-provenance retrieval over a free-connex
/// decomposition of a self-join-free query.
pub struct ProvenancePlan<'q> {
    q: &'q ConjunctiveQuery,
    fc: FreeConnex,
    tree: ReducedTree<'q>,
    /// For every connex node and row, the provenance contributed there.
    annotations: Vec<Vec<Vec<Tuple>>>,
}

impl<'q> ProvenancePlan<'q> {
    pub fn new(q: &'q ConjunctiveQuery, d: &Database, td: Option<&TreeDecomposition>) -> Result<Self> {
        if !q.is_self_join_free() {
            return Err(Error::NotSelfJoinFree);
        }
        let fc = match td {
            Some(td) => free_connex_subtree(q, td)?,
            None => free_connex_join_tree(q)?,
        };
        let tree = ReducedTree::build(q, d, &fc.td)?;
        let td = &fc.td;
        let assignment = td.atom_assignment(q)?;
        let mut owners = BTreeSet::new();
        for a in q.body() {
            assert!(owners.insert(a.relation.clone()), "each relation annotates exactly one atom");
        }
        let own = |u: usize, row: &[DataValue]| -> Vec<Tuple> {
            let rel = tree.relation(u);
            (0..q.body().len())
                .filter(|&a| assignment[a] == u)
                .map(|a| {
                    let atom = &q.body()[a];
                    let values = (0..atom.vars.len())
                        .map(|p| row[rel.column(q.written_var(a, p)).expect("atom inside its bag")].clone())
                        .collect();
                    Tuple::new(atom.relation.clone(), values)
                })
                .collect()
        };
        let key_of = |cols: &[usize], row: &[DataValue]| -> Vec<DataValue> { cols.iter().map(|&c| row[c].clone()).collect() };
        let mut hanging: Vec<BTreeMap<Vec<DataValue>, BTreeSet<Tuple>>> = alloc::vec![BTreeMap::new(); td.len()];
        for u in td.postorder() {
            if fc.is_connex(u) {
                continue;
            }
            let rel = tree.relation(u);
            let key = td.key(u);
            let cols: Vec<usize> = key.iter().map(|v| rel.column(*v).expect("key in bag")).collect();
            let mut by_key: BTreeMap<Vec<DataValue>, BTreeSet<Tuple>> = BTreeMap::new();
            for row in rel.rows() {
                let mut ann: BTreeSet<Tuple> = own(u, row).into_iter().collect();
                for &c in td.children(u) {
                    let child_cols: Vec<usize> = td.key(c).iter().map(|v| rel.column(*v).expect("key in bag")).collect();
                    if let Some(set) = hanging[c].get(&key_of(&child_cols, row)) {
                        ann.extend(set.iter().cloned());
                    }
                }
                by_key.entry(key_of(&cols, row)).or_default().extend(ann);
            }
            hanging[u] = by_key;
        }
        let mut annotations = alloc::vec![Vec::new(); td.len()];
        for &u in &fc.connex {
            let rel = tree.relation(u);
            annotations[u] = rel
                .rows()
                .iter()
                .map(|row| {
                    let mut ann: BTreeSet<Tuple> = own(u, row).into_iter().collect();
                    for &c in td.children(u) {
                        if fc.is_connex(c) {
                            continue;
                        }
                        let cols: Vec<usize> = td.key(c).iter().map(|v| rel.column(*v).expect("key in bag")).collect();
                        if let Some(set) = hanging[c].get(&key_of(&cols, row)) {
                            ann.extend(set.iter().cloned());
                        }
                    }
                    ann.into_iter().collect()
                })
                .collect();
        }
        Ok(ProvenancePlan {
            q,
            fc,
            tree,
            annotations,
        })
    }

    pub fn free_connex(&self) -> &FreeConnex {
        &self.fc
    }

    /// The which-provenance of `answer` as a region of database tuples.
    pub fn ball(&self, answer: &Tuple) -> Result<Region> {
        let values = head_values(self.q, answer)?;
        let mut points = Vec::new();
        for &u in &self.fc.connex {
            let rel = self.tree.relation(u);
            let row: Vec<DataValue> = rel.vars().iter().map(|v| values[v].clone()).collect();
            let r = rel
                .rows()
                .binary_search(&row)
                .map_err(|_| Error::NotAnAnswer(answer.to_string()))?;
            points.extend(self.annotations[u][r].iter().cloned().map(GroundPoint::DbTuple));
        }
        Ok(Region::from_points(points))
    }

    pub fn next(&self, covered: &Region, exclude: &BTreeSet<Tuple>) -> Result<Option<NextAnswer<Rational>>> {
        let td = &self.fc.td;
        let scores = (0..td.len())
            .map(|u| {
                self.annotations[u]
                    .iter()
                    .map(|ann| {
                        let fresh = ann.iter().filter(|t| !covered.contains(&GroundPoint::DbTuple((*t).clone()))).count();
                        Rational::from_integer(fresh as i128)
                    })
                    .collect()
            })
            .collect();
        let vars = distinct_head(self.q);
        let exclude = exclude_keys(self.q, &vars, exclude)?;
        let mp = MaxPlusTree::new(td, &self.fc.connex, self.tree.relations(), scores);
        Ok(mp.best(&vars, &exclude).map(|(values, marginal)| NextAnswer {
            answer: answer_from(self.q, &vars, &values),
            marginal,
        }))
    }
}

/// Retrieval of the answer with the most uncovered which-provenance.
pub fn cqnext_provenance(
    q: &ConjunctiveQuery,
    td: Option<&TreeDecomposition>,
    d: &Database,
    s: &[Tuple],
) -> Result<Option<NextAnswer<Rational>>> {
    let plan = ProvenancePlan::new(q, d, td)?;
    let mut covered = Region::new();
    for t in s {
        covered.union_with(&plan.ball(t)?);
    }
    plan.next(&covered, &BTreeSet::new())
}

/// Which retrieval engine drives [`greedy_combined`].
#[derive(Clone, Copy, Debug)]
pub enum CombinedMode<'a> {
    Naive(&'a VolumeAssignment),
    Tropical(&'a VolumeAssignment),
    Provenance,
}

/// Greedy selection by `k` rounds of top-1 retrieval. The tropical and
/// provenance engines never materialize the answer set.
pub fn greedy_combined(
    q: &ConjunctiveQuery,
    d: &Database,
    k: usize,
    mode: CombinedMode<'_>,
    td: Option<&TreeDecomposition>,
) -> Result<DiverseResult<Rational>> {
    let mut selected: Vec<Tuple> = Vec::new();
    let mut gains: Vec<Rational> = Vec::new();
    let mut exclude: BTreeSet<Tuple> = BTreeSet::new();
    let mut covered = Region::new();
    match mode {
        CombinedMode::Naive(v) => {
            let answers = enumerate_answers(q, d)?;
            let mut r = greedy_diversify_plain(&answers.answers, k, v)?;
            r.mode = Mode::GreedyCombined;
            return Ok(r);
        }
        CombinedMode::Tropical(v) => {
            if v.ball != Ball::Pos {
                return Err(Error::IncompatiblePairing(
                    "the tropical engine needs the pos or pos-w assignment".into(),
                ));
            }
            if k == 0 {
                return Ok(DiverseResult::from_gains(selected, gains, Mode::GreedyCombined, false));
            }
            let plan = TropicalPlan::new(q, d, td)?;
            for _ in 0..k {
                let Some(next) = plan.next(v, &covered, &exclude)? else {
                    break;
                };
                covered.union_with(&v.ball(&next.answer)?);
                exclude.insert(next.answer.clone());
                selected.push(next.answer);
                gains.push(next.marginal);
            }
        }
        CombinedMode::Provenance => {
            if k == 0 {
                return Ok(DiverseResult::from_gains(selected, gains, Mode::GreedyCombined, false));
            }
            let plan = ProvenancePlan::new(q, d, td)?;
            for _ in 0..k {
                let Some(next) = plan.next(&covered, &exclude)? else {
                    break;
                };
                covered.union_with(&plan.ball(&next.answer)?);
                exclude.insert(next.answer.clone());
                selected.push(next.answer);
                gains.push(next.marginal);
            }
        }
    }
    assert_non_increasing(&gains);
    Ok(DiverseResult::from_gains(selected, gains, Mode::GreedyCombined, false))
}
