//! Max-plus message passing over a connected part of a tree decomposition.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::engine::LocalRel;
use crate::query::{TreeDecomposition, VarId};
use crate::rational::Rational;
use crate::relcore::DataValue;

type Key = Vec<DataValue>;

/// Rows of the participating bags with one score each. The value of a
/// combination of consistent rows is the sum of their scores.
pub(crate) struct MaxPlusTree<'a> {
    td: &'a TreeDecomposition,
    order: Vec<usize>,
    member: Vec<bool>,
    rels: &'a [LocalRel],
    scores: Vec<Vec<Rational>>,
    active: Vec<Vec<bool>>,
    child_cols: Vec<Vec<usize>>,
    parent_cols: Vec<Vec<usize>>,
}

struct Messages {
    up: Vec<Vec<Rational>>,
    down: Vec<Vec<Rational>>,
}

impl<'a> MaxPlusTree<'a> {
    /// `participants` must be connected and contain the root; `scores[u]`
    /// has one entry per row of `rels[u]` for every participant `u`.
    pub fn new(
        td: &'a TreeDecomposition,
        participants: &[usize],
        rels: &'a [LocalRel],
        scores: Vec<Vec<Rational>>,
    ) -> Self {
        let mut member = alloc::vec![false; td.len()];
        for &u in participants {
            member[u] = true;
        }
        debug_assert!(member[td.root()]);
        let order: Vec<usize> = td.preorder().into_iter().filter(|&u| member[u]).collect();
        let mut child_cols = alloc::vec![Vec::new(); td.len()];
        let mut parent_cols = alloc::vec![Vec::new(); td.len()];
        for &u in &order {
            if let Some(p) = td.parent(u) {
                let key = td.key(u);
                child_cols[u] = key.iter().map(|v| rels[u].column(*v).expect("key in bag")).collect();
                parent_cols[u] = key.iter().map(|v| rels[p].column(*v).expect("key in bag")).collect();
            }
        }
        let active = (0..td.len())
            .map(|u| alloc::vec![member[u]; rels[u].len()])
            .collect();
        let mut tree = MaxPlusTree {
            td,
            order,
            member,
            rels,
            scores,
            active,
            child_cols,
            parent_cols,
        };
        tree.reduce();
        tree
    }

    fn key(&self, node: usize, cols: &[usize], row: usize) -> Key {
        cols.iter().map(|&c| self.rels[node].row(row)[c].clone()).collect()
    }

    fn active_rows(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.active[node].iter().enumerate().filter(|(_, a)| **a).map(|(i, _)| i)
    }

    fn reduce(&mut self) {
        for i in (1..self.order.len()).rev() {
            let c = self.order[i];
            let p = self.td.parent(c).expect("non-root participant");
            let keys: BTreeSet<Key> = self.active_rows(c).map(|r| self.key(c, &self.child_cols[c], r)).collect();
            for r in 0..self.rels[p].len() {
                if self.active[p][r] && !keys.contains(&self.key(p, &self.parent_cols[c], r)) {
                    self.active[p][r] = false;
                }
            }
        }
        for i in 1..self.order.len() {
            let c = self.order[i];
            let p = self.td.parent(c).expect("non-root participant");
            let keys: BTreeSet<Key> = self.active_rows(p).map(|r| self.key(p, &self.parent_cols[c], r)).collect();
            for r in 0..self.rels[c].len() {
                if self.active[c][r] && !keys.contains(&self.key(c, &self.child_cols[c], r)) {
                    self.active[c][r] = false;
                }
            }
        }
    }

    fn children(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.td.children(u).iter().copied().filter(|&c| self.member[c])
    }

    fn messages(&self) -> Messages {
        let zero = Rational::from_integer(0);
        let n = self.td.len();
        let mut up: Vec<Vec<Rational>> = (0..n).map(|u| alloc::vec![zero; self.rels[u].len()]).collect();
        let mut best: Vec<BTreeMap<Key, Rational>> = alloc::vec![BTreeMap::new(); n];
        for &u in self.order.iter().rev() {
            for r in self.active_rows(u).collect::<Vec<_>>() {
                let mut value = self.scores[u][r];
                for c in self.children(u) {
                    value += best[c][&self.key(u, &self.parent_cols[c], r)];
                }
                up[u][r] = value;
            }
            if self.td.parent(u).is_some() {
                let mut m: BTreeMap<Key, Rational> = BTreeMap::new();
                for r in self.active_rows(u) {
                    let k = self.key(u, &self.child_cols[u], r);
                    let e = m.entry(k).or_insert(up[u][r]);
                    if up[u][r] > *e {
                        *e = up[u][r];
                    }
                }
                best[u] = m;
            }
        }
        let mut down: Vec<Vec<Rational>> = (0..n).map(|u| alloc::vec![zero; self.rels[u].len()]).collect();
        for &p in &self.order {
            for c in self.children(p).collect::<Vec<_>>() {
                let mut m: BTreeMap<Key, Rational> = BTreeMap::new();
                for r in self.active_rows(p) {
                    let k = self.key(p, &self.parent_cols[c], r);
                    let value = down[p][r] + up[p][r] - best[c][&k];
                    let e = m.entry(k).or_insert(value);
                    if value > *e {
                        *e = value;
                    }
                }
                for r in self.active_rows(c).collect::<Vec<_>>() {
                    down[c][r] = m[&self.key(c, &self.child_cols[c], r)];
                }
            }
        }
        Messages { up, down }
    }

    /// Highest total over all consistent combinations, if any exists.
    pub fn max_value(&self) -> Option<Rational> {
        let root = self.td.root();
        let msgs = self.messages();
        self.active_rows(root).map(|r| msgs.up[root][r]).max()
    }

    fn fix(&mut self, var: VarId, value: &DataValue) {
        for &u in &self.order {
            if let Some(col) = self.rels[u].column(var) {
                for r in 0..self.rels[u].len() {
                    if self.active[u][r] && &self.rels[u].row(r)[col] != value {
                        self.active[u][r] = false;
                    }
                }
            }
        }
        self.reduce();
    }

    /// The lexicographically smallest assignment of `head` that reaches the
    /// maximum total and is not in `exclude`. Excluded assignments must not
    /// be the only maximizers unless the maximum is zero; the search then
    /// returns the smallest non-excluded assignment of value zero.
    pub fn best(mut self, head: &[VarId], exclude: &BTreeSet<Key>) -> Option<(Key, Rational)> {
        let target = self.max_value()?;
        let mut fixed: Vec<Option<DataValue>> = alloc::vec![None; head.iter().map(|v| v.index() + 1).max().unwrap_or(0)];
        if self.descend(head, 0, target, exclude, &mut fixed) {
            Some((head.iter().map(|v| fixed[v.index()].clone().expect("head fixed")).collect(), target))
        } else {
            None
        }
    }

    fn descend(
        &mut self,
        head: &[VarId],
        level: usize,
        target: Rational,
        exclude: &BTreeSet<Key>,
        fixed: &mut Vec<Option<DataValue>>,
    ) -> bool {
        let Some(&var) = head.get(level) else {
            let answer: Key = head.iter().map(|v| fixed[v.index()].clone().expect("head fixed")).collect();
            return !exclude.contains(&answer);
        };
        if fixed[var.index()].is_some() {
            return self.descend(head, level + 1, target, exclude, fixed);
        }
        let node = *self
            .order
            .iter()
            .find(|&&u| self.rels[u].column(var).is_some())
            .expect("head variable lies in a participating bag");
        let col = self.rels[node].column(var).expect("column exists");
        let msgs = self.messages();
        let values: BTreeSet<DataValue> = self
            .active_rows(node)
            .filter(|&r| msgs.up[node][r] + msgs.down[node][r] == target)
            .map(|r| self.rels[node].row(r)[col].clone())
            .collect();
        for v in values {
            let saved = self.active.clone();
            self.fix(var, &v);
            fixed[var.index()] = Some(v);
            if self.descend(head, level + 1, target, exclude, fixed) {
                return true;
            }
            fixed[var.index()] = None;
            self.active = saved;
        }
        false
    }
}
