use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::naive::NaiveJoin;
use crate::error::{Error, Result};
use crate::query::ConjunctiveQuery;
use crate::relcore::{Database, Tuple};

pub const DEFAULT_EXTENSION_LIMIT: u64 = 10_000_000;

/// For each answer, the database tuples used by some homomorphism producing it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProvenanceMap {
    map: BTreeMap<Tuple, Vec<Tuple>>,
}

impl ProvenanceMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, answer: Tuple, mut witnesses: Vec<Tuple>) {
        witnesses.sort();
        witnesses.dedup();
        self.map.insert(answer, witnesses);
    }

    /// The provenance set of `answer`, sorted.
    pub fn get(&self, answer: &Tuple) -> Option<&[Tuple]> {
        self.map.get(answer).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &[Tuple])> {
        self.map.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Which-provenance by exhaustive homomorphism enumeration. The extension
/// budget is shared across all answers.
pub fn provenance_map(q: &ConjunctiveQuery, d: &Database, answers: &[Tuple], limit: u64) -> Result<ProvenanceMap> {
    let join = NaiveJoin::new(q, d)?;
    let mut out = ProvenanceMap::new();
    let mut remaining = limit;
    for answer in answers {
        let not_an_answer = || Error::NotAnAnswer(answer.to_string());
        if answer.relation != *q.name() {
            return Err(not_an_answer());
        }
        let asg = join.bind_head(&answer.values).ok_or_else(not_an_answer)?;
        let mut witnesses = BTreeSet::new();
        let used = join
            .for_each(asg, Some(remaining), |h| {
                for atom in 0..q.body().len() {
                    witnesses.insert(join.atom_tuple(atom, h));
                }
                ControlFlow::Continue(())
            })
            .map_err(|_| Error::ExtensionLimit(limit))?;
        remaining -= used.min(remaining);
        if witnesses.is_empty() {
            return Err(not_an_answer());
        }
        out.map.insert(answer.clone(), witnesses.into_iter().collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::enumerate_answers;
    use crate::query::parse_cq;

    fn d1() -> Database {
        Database::from_tuples([
            Tuple::parse("R", &["a", "a"]),
            Tuple::parse("R", &["a", "b"]),
            Tuple::parse("R", &["b", "a"]),
        ])
        .unwrap()
    }

    #[test]
    fn two_hop_provenance_over_d1() {
        let q = parse_cq("Q1(x,y) <- R(x,z), R(z,y).").unwrap();
        let answers = enumerate_answers(&q, &d1()).unwrap();
        let p = provenance_map(&q, &d1(), &answers.answers, DEFAULT_EXTENSION_LIMIT).unwrap();
        assert_eq!(
            p.get(&Tuple::parse("Q1", &["a", "a"])).unwrap(),
            &[Tuple::parse("R", &["a", "a"]), Tuple::parse("R", &["a", "b"]), Tuple::parse("R", &["b", "a"])]
        );
        assert_eq!(
            p.get(&Tuple::parse("Q1", &["b", "b"])).unwrap(),
            &[Tuple::parse("R", &["a", "b"]), Tuple::parse("R", &["b", "a"])]
        );
    }

    #[test]
    fn identity_query_provenance_is_the_tuple() {
        let q = parse_cq("Q(x,y) <- R(x,y).").unwrap();
        let t = Tuple::parse("Q", &["a", "b"]);
        let p = provenance_map(&q, &d1(), core::slice::from_ref(&t), DEFAULT_EXTENSION_LIMIT).unwrap();
        assert_eq!(p.get(&t).unwrap(), &[Tuple::parse("R", &["a", "b"])]);
    }

    #[test]
    fn non_answers_and_budget() {
        let q = parse_cq("Q1(x,y) <- R(x,z), R(z,y).").unwrap();
        let bad = Tuple::parse("Q1", &["c", "a"]);
        assert!(matches!(
            provenance_map(&q, &d1(), &[bad], DEFAULT_EXTENSION_LIMIT),
            Err(Error::NotAnAnswer(_))
        ));
        let good = Tuple::parse("Q1", &["a", "a"]);
        assert_eq!(provenance_map(&q, &d1(), &[good], 1), Err(Error::ExtensionLimit(1)));
    }
}
