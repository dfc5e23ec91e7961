use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::local::{backtrack, Assignment, Budget, LocalRel, Stop};
use crate::error::{Error, Result};
use crate::query::ConjunctiveQuery;
use crate::relcore::{Database, Tuple};

/// The answers of a query, sorted by value sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerSet {
    pub query: ConjunctiveQuery,
    pub answers: Vec<Tuple>,
}

impl AnswerSet {
    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.answers.binary_search(t).is_ok()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Tuple> {
        self.answers.iter()
    }
}

/// The rows of atom `atom` that satisfy its equality rewrites, projected to
/// the atom's distinct variables.
pub fn atom_relation(q: &ConjunctiveQuery, d: &Database, atom: usize) -> Result<LocalRel> {
    let a = &q.body()[atom];
    let rel = d
        .relation(&a.relation)
        .ok_or_else(|| Error::UnknownRelation(a.relation.to_string()))?;
    if rel.arity() != a.vars.len() {
        return Err(Error::ArityMismatch {
            relation: a.relation.to_string(),
            expected: rel.arity(),
            found: a.vars.len(),
        });
    }
    let vars = q.atom_vars(atom);
    let written: Vec<_> = (0..a.vars.len()).map(|p| q.written_var(atom, p)).collect();
    let first: Vec<usize> = vars
        .iter()
        .map(|v| written.iter().position(|w| w == v).expect("atom var is written"))
        .collect();
    let checks: Vec<(usize, usize)> = q
        .rewrites()
        .iter()
        .filter(|r| r.atom == atom)
        .map(|r| (r.position, written.iter().position(|w| *w == r.original).expect("original is written")))
        .collect();
    let rows = rel
        .rows()
        .iter()
        .filter(|row| checks.iter().all(|&(p, o)| row[p] == row[o]))
        .map(|row| first.iter().map(|&c| row[c].clone()).collect());
    Ok(LocalRel::new(vars, rows))
}

/// Backtracking homomorphism search over one scan per body atom.
#[derive(Clone, Debug)]
pub struct NaiveJoin<'q> {
    q: &'q ConjunctiveQuery,
    scans: Vec<LocalRel>,
}

impl<'q> NaiveJoin<'q> {
    pub fn new(q: &'q ConjunctiveQuery, d: &Database) -> Result<Self> {
        let scans = (0..q.body().len())
            .map(|a| atom_relation(q, d, a))
            .collect::<Result<_>>()?;
        Ok(NaiveJoin { q, scans })
    }

    pub fn query(&self) -> &ConjunctiveQuery {
        self.q
    }

    /// An assignment with the head bound to `answer`, or `None` when
    /// repeated head variables disagree.
    pub fn bind_head(&self, answer: &[crate::relcore::DataValue]) -> Option<Assignment> {
        let mut asg: Assignment = alloc::vec![None; self.q.var_count()];
        if answer.len() != self.q.head().len() {
            return None;
        }
        for (v, val) in self.q.head().iter().zip(answer) {
            match &asg[v.index()] {
                Some(prev) if prev != val => return None,
                _ => asg[v.index()] = Some(val.clone()),
            }
        }
        Some(asg)
    }

    /// Visits every homomorphism extending `asg`. Returns the number of
    /// extensions tried, or an error once `limit` is exceeded.
    pub fn for_each<F>(&self, mut asg: Assignment, limit: Option<u64>, mut f: F) -> Result<u64>
    where
        F: FnMut(&Assignment) -> ControlFlow<()>,
    {
        let rels: Vec<&LocalRel> = self.scans.iter().collect();
        let mut budget = Budget { used: 0, limit };
        match backtrack(&rels, &mut asg, &mut budget, &mut f) {
            ControlFlow::Break(Stop::Budget) => Err(Error::ExtensionLimit(limit.unwrap_or(0))),
            _ => Ok(budget.used),
        }
    }

    pub fn answer_of(&self, asg: &Assignment) -> Tuple {
        Tuple::new(
            self.q.name().clone(),
            self.q
                .head()
                .iter()
                .map(|v| asg[v.index()].clone().expect("head var bound"))
                .collect(),
        )
    }

    /// The database tuple matched by atom `atom` under `asg`.
    pub fn atom_tuple(&self, atom: usize, asg: &Assignment) -> Tuple {
        let a = &self.q.body()[atom];
        Tuple::new(
            a.relation.clone(),
            (0..a.vars.len())
                .map(|p| asg[self.q.written_var(atom, p).index()].clone().expect("atom var bound"))
                .collect(),
        )
    }
}

/// Evaluates `q` over `d` by backtracking search.
pub fn enumerate_answers(q: &ConjunctiveQuery, d: &Database) -> Result<AnswerSet> {
    let join = NaiveJoin::new(q, d)?;
    let mut answers = BTreeSet::new();
    join.for_each(alloc::vec![None; q.var_count()], None, |asg| {
        answers.insert(join.answer_of(asg));
        ControlFlow::Continue(())
    })?;
    Ok(AnswerSet {
        query: q.clone(),
        answers: answers.into_iter().collect(),
    })
}

/// Number of homomorphisms mapping the head to `answer`.
pub fn homomorphism_count(q: &ConjunctiveQuery, d: &Database, answer: &Tuple) -> Result<u64> {
    let join = NaiveJoin::new(q, d)?;
    let Some(asg) = join.bind_head(&answer.values) else {
        return Ok(0);
    };
    let mut count = 0u64;
    join.for_each(asg, None, |_| {
        count += 1;
        ControlFlow::Continue(())
    })?;
    Ok(count)
}
