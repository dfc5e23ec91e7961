use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::query::VarId;
use crate::relcore::DataValue;

/// A partial map from variables to values, indexed by [`VarId`].
pub type Assignment = Vec<Option<DataValue>>;

/// An in-memory relation over named variables with one index per column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRel {
    vars: Vec<VarId>,
    rows: Vec<Vec<DataValue>>,
    index: Vec<BTreeMap<DataValue, Vec<u32>>>,
}

impl LocalRel {
    pub fn new(vars: Vec<VarId>, rows: impl IntoIterator<Item = Vec<DataValue>>) -> Self {
        let set: BTreeSet<Vec<DataValue>> = rows.into_iter().collect();
        let rows: Vec<Vec<DataValue>> = set.into_iter().collect();
        let mut index = alloc::vec![BTreeMap::<DataValue, Vec<u32>>::new(); vars.len()];
        for (i, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                index[c].entry(v.clone()).or_default().push(i as u32);
            }
        }
        LocalRel { vars, rows, index }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn rows(&self) -> &[Vec<DataValue>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[DataValue] {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, v: VarId) -> Option<usize> {
        self.vars.iter().position(|&x| x == v)
    }

    pub fn project(&self, vars: &[VarId]) -> LocalRel {
        let cols: Vec<usize> = vars.iter().map(|v| self.column(*v).expect("projection onto own vars")).collect();
        LocalRel::new(
            vars.to_vec(),
            self.rows.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()),
        )
    }

    /// Keeps the rows that agree with some row of `other` on shared variables.
    pub fn semijoin(&mut self, other: &LocalRel) {
        let shared: Vec<(usize, usize)> = self
            .vars
            .iter()
            .enumerate()
            .filter_map(|(i, v)| other.column(*v).map(|j| (i, j)))
            .collect();
        if shared.is_empty() {
            if other.is_empty() {
                *self = LocalRel::new(self.vars.clone(), []);
            }
            return;
        }
        let keys: BTreeSet<Vec<&DataValue>> = other
            .rows
            .iter()
            .map(|r| shared.iter().map(|&(_, j)| &r[j]).collect())
            .collect();
        let kept: Vec<Vec<DataValue>> = self
            .rows
            .iter()
            .filter(|r| {
                let k: Vec<&DataValue> = shared.iter().map(|&(i, _)| &r[i]).collect();
                keys.contains(&k)
            })
            .cloned()
            .collect();
        if kept.len() != self.rows.len() {
            *self = LocalRel::new(self.vars.clone(), kept);
        }
    }

    /// Row indices consistent with the bound variables of `asg`, ascending.
    pub fn matching(&self, asg: &Assignment) -> Vec<u32> {
        let bound: Vec<(usize, &DataValue)> = self
            .vars
            .iter()
            .enumerate()
            .filter_map(|(c, v)| asg[v.index()].as_ref().map(|val| (c, val)))
            .collect();
        let Some(&(probe_col, probe_val)) = bound
            .iter()
            .min_by_key(|(c, val)| self.index[*c].get(*val).map_or(0, Vec::len))
        else {
            return (0..self.rows.len() as u32).collect();
        };
        self.index[probe_col]
            .get(probe_val)
            .map(|ids| {
                ids.iter()
                    .copied()
                    .filter(|&i| bound.iter().all(|(c, val)| &self.rows[i as usize][*c] == *val))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Binds the variables of row `i`; returns the variables it newly bound.
    pub fn bind(&self, i: u32, asg: &mut Assignment) -> Vec<VarId> {
        let mut fresh = Vec::new();
        for (c, v) in self.vars.iter().enumerate() {
            let slot = &mut asg[v.index()];
            if slot.is_none() {
                *slot = Some(self.rows[i as usize][c].clone());
                fresh.push(*v);
            }
        }
        fresh
    }
}

pub(crate) fn unbind(asg: &mut Assignment, vars: &[VarId]) {
    for v in vars {
        asg[v.index()] = None;
    }
}

/// Counts extensions and stops once a limit is passed.
pub(crate) struct Budget {
    pub used: u64,
    pub limit: Option<u64>,
}

impl Budget {
    pub fn spend(&mut self) -> bool {
        self.used += 1;
        self.limit.is_none_or(|l| self.used <= l)
    }
}

pub(crate) enum Stop {
    Caller,
    Budget,
}

/// Backtracking join over `rels`: visits every assignment extending `asg`
/// that is consistent with all relations.
pub(crate) fn backtrack<F>(
    rels: &[&LocalRel],
    asg: &mut Assignment,
    budget: &mut Budget,
    f: &mut F,
) -> ControlFlow<Stop>
where
    F: FnMut(&Assignment) -> ControlFlow<()>,
{
    let mut done = alloc::vec![false; rels.len()];
    step(rels, &mut done, asg, budget, f)
}

fn step<F>(
    rels: &[&LocalRel],
    done: &mut [bool],
    asg: &mut Assignment,
    budget: &mut Budget,
    f: &mut F,
) -> ControlFlow<Stop>
where
    F: FnMut(&Assignment) -> ControlFlow<()>,
{
    let next = (0..rels.len()).filter(|&i| !done[i]).min_by_key(|&i| {
        let bound = rels[i].vars().iter().filter(|v| asg[v.index()].is_some()).count();
        (core::cmp::Reverse(bound), rels[i].len(), i)
    });
    let Some(i) = next else {
        return match f(asg) {
            ControlFlow::Continue(()) => ControlFlow::Continue(()),
            ControlFlow::Break(()) => ControlFlow::Break(Stop::Caller),
        };
    };
    done[i] = true;
    for row in rels[i].matching(asg) {
        if !budget.spend() {
            done[i] = false;
            return ControlFlow::Break(Stop::Budget);
        }
        let fresh = rels[i].bind(row, asg);
        let flow = step(rels, done, asg, budget, f);
        unbind(asg, &fresh);
        if flow.is_break() {
            done[i] = false;
            return flow;
        }
    }
    done[i] = false;
    ControlFlow::Continue(())
}

/// Joins `rels` and projects the result onto `out`.
pub(crate) fn join_project(rels: &[&LocalRel], out: &[VarId], var_count: usize) -> LocalRel {
    let mut rows = BTreeSet::new();
    let mut asg: Assignment = alloc::vec![None; var_count];
    let mut budget = Budget { used: 0, limit: None };
    let _ = backtrack(rels, &mut asg, &mut budget, &mut |a: &Assignment| {
        rows.insert(out.iter().map(|v| a[v.index()].clone().expect("output var bound")).collect::<Vec<_>>());
        ControlFlow::Continue(())
    });
    LocalRel::new(out.to_vec(), rows)
}
