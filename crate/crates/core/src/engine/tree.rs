use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::local::{join_project, unbind, Assignment, LocalRel};
use super::naive::{atom_relation, AnswerSet};
use crate::error::{Error, Result};
use crate::query::{validate_tree_decomposition, ConjunctiveQuery, FreeConnex, TreeDecomposition};
use crate::relcore::{Database, Tuple};

/// One materialized relation per bag, fully reduced by semijoins so that
/// every row extends to a homomorphism.
#[derive(Clone, Debug)]
pub struct ReducedTree<'q> {
    q: &'q ConjunctiveQuery,
    td: TreeDecomposition,
    rels: Vec<LocalRel>,
}

impl<'q> ReducedTree<'q> {
    pub fn build(q: &'q ConjunctiveQuery, d: &Database, td: &TreeDecomposition) -> Result<Self> {
        validate_tree_decomposition(q, td).map_err(Error::InvalidDecomposition)?;
        let scans: Vec<LocalRel> = (0..q.body().len())
            .map(|a| atom_relation(q, d, a))
            .collect::<Result<_>>()?;
        let mut rels: Vec<LocalRel> = (0..td.len())
            .map(|u| {
                let bag = td.bag(u);
                let parts: Vec<LocalRel> = scans
                    .iter()
                    .filter_map(|s| {
                        let shared: Vec<_> = s.vars().iter().copied().filter(|v| bag.contains(v)).collect();
                        (!shared.is_empty()).then(|| s.project(&shared))
                    })
                    .collect();
                let refs: Vec<&LocalRel> = parts.iter().collect();
                join_project(&refs, bag, q.var_count())
            })
            .collect();
        for u in td.postorder() {
            for &c in td.children(u) {
                let mut parent = core::mem::replace(&mut rels[u], LocalRel::new(Vec::new(), []));
                parent.semijoin(&rels[c]);
                rels[u] = parent;
            }
        }
        for u in td.preorder() {
            for &c in td.children(u) {
                let mut child = core::mem::replace(&mut rels[c], LocalRel::new(Vec::new(), []));
                child.semijoin(&rels[u]);
                rels[c] = child;
            }
        }
        Ok(ReducedTree {
            q,
            td: td.clone(),
            rels,
        })
    }

    pub fn td(&self) -> &TreeDecomposition {
        &self.td
    }

    pub fn relation(&self, node: usize) -> &LocalRel {
        &self.rels[node]
    }

    /// Bag relations indexed by node id.
    pub fn relations(&self) -> &[LocalRel] {
        &self.rels
    }

    pub fn is_empty(&self) -> bool {
        self.rels[self.td.root()].is_empty()
    }

    /// Visits the joins of the bags in `nodes`, which must form a connected
    /// subtree containing the root. Rows are tried in ascending order.
    pub fn for_each<F>(&self, nodes: &[usize], mut f: F) -> ControlFlow<()>
    where
        F: FnMut(&Assignment) -> ControlFlow<()>,
    {
        let order: Vec<usize> = self.td.preorder().into_iter().filter(|u| nodes.contains(u)).collect();
        let mut asg: Assignment = alloc::vec![None; self.q.var_count()];
        self.descend(&order, &mut asg, &mut f)
    }

    fn descend<F>(&self, order: &[usize], asg: &mut Assignment, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Assignment) -> ControlFlow<()>,
    {
        let Some((&u, rest)) = order.split_first() else {
            return f(asg);
        };
        let rel = &self.rels[u];
        for row in rel.matching(asg) {
            let fresh = rel.bind(row, asg);
            let flow = self.descend(rest, asg, f);
            unbind(asg, &fresh);
            flow?;
        }
        ControlFlow::Continue(())
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
}

/// Evaluates `q` along any valid tree decomposition.
pub fn td_answers(q: &ConjunctiveQuery, td: &TreeDecomposition, d: &Database) -> Result<AnswerSet> {
    let tree = ReducedTree::build(q, d, td)?;
    let all: Vec<usize> = (0..td.len()).collect();
    let mut answers = BTreeSet::new();
    let _ = tree.for_each(&all, |asg| {
        answers.insert(tree.answer_of(asg));
        ControlFlow::Continue(())
    });
    Ok(AnswerSet {
        query: q.clone(),
        answers: answers.into_iter().collect(),
    })
}

/// Yannakakis evaluation over a join tree whose bags are atom variable sets.
pub fn yannakakis_answers(q: &ConjunctiveQuery, td: &TreeDecomposition, d: &Database) -> Result<AnswerSet> {
    validate_tree_decomposition(q, td).map_err(Error::InvalidDecomposition)?;
    if !td.is_join_tree_of(q) {
        return Err(Error::Invalid(
            "Yannakakis evaluation needs a join tree whose bags are atom variable sets".into(),
        ));
    }
    td_answers(q, td, d)
}

/// Answers read off the connex subtree only; each answer is produced once.
pub fn connex_answers(q: &ConjunctiveQuery, fc: &FreeConnex, d: &Database) -> Result<AnswerSet> {
    let tree = ReducedTree::build(q, d, &fc.td)?;
    let mut answers = Vec::new();
    let _ = tree.for_each(&fc.connex, |asg| {
        answers.push(tree.answer_of(asg));
        ControlFlow::Continue(())
    });
    answers.sort();
    Ok(AnswerSet {
        query: q.clone(),
        answers,
    })
}
