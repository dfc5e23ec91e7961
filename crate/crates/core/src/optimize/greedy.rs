use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use super::objective::{Objective, Score};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::relcore::Tuple;

pub const DEFAULT_MAX_SUBSETS: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Greedy,
    Exact,
    GreedyCombined,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Greedy => "greedy",
            Mode::Exact => "exact",
            Mode::GreedyCombined => "greedy-combined",
        }
    }
}

/// A selected subset with the gain recorded at each step.
#[derive(Clone, Debug, PartialEq)]
pub struct DiverseResult<S> {
    pub selected: Vec<Tuple>,
    pub gains: Vec<S>,
    pub total: S,
    pub mode: Mode,
    /// Whether the selection is known to be optimal.
    pub optimal: bool,
}

impl<S: Score> DiverseResult<S> {
    pub(crate) fn from_gains(selected: Vec<Tuple>, gains: Vec<S>, mode: Mode, optimal: bool) -> Self {
        let total = gains.iter().fold(S::zero(), |acc, g| acc.plus(*g));
        DiverseResult {
            selected,
            gains,
            total,
            mode,
            optimal,
        }
    }
}

fn distinct(answers: &[Tuple]) -> Vec<Tuple> {
    answers.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

pub(crate) fn assert_non_increasing<S: Score>(gains: &[S]) {
    for w in gains.windows(2) {
        assert!(
            w[1].compare(&w[0]) != Ordering::Greater,
            "greedy gains increased from {:?} to {:?}",
            w[0],
            w[1]
        );
    }
}

/// Greedy selection scanning every candidate in every round. Ties go to the
/// smallest tuple.
pub fn greedy_diversify_plain<O: Objective>(answers: &[Tuple], k: usize, obj: &O) -> Result<DiverseResult<O::Score>> {
    let pool = distinct(answers);
    let mut taken = alloc::vec![false; pool.len()];
    let mut covered = obj.empty();
    let mut selected = Vec::new();
    let mut gains = Vec::new();
    for _ in 0..k.min(pool.len()) {
        let mut best: Option<(usize, O::Score)> = None;
        for (i, t) in pool.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let g = obj.gain(&covered, t)?;
            if best.is_none_or(|(_, b)| g.compare(&b) == Ordering::Greater) {
                best = Some((i, g));
            }
        }
        let (i, g) = best.expect("an unselected candidate remains");
        taken[i] = true;
        obj.cover(&mut covered, &pool[i])?;
        selected.push(pool[i].clone());
        gains.push(g);
    }
    assert_non_increasing(&gains);
    Ok(DiverseResult::from_gains(selected, gains, Mode::Greedy, false))
}

struct Entry<S> {
    gain: S,
    index: usize,
    round: usize,
}

impl<S: Score> PartialEq for Entry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Score> Eq for Entry<S> {}

impl<S: Score> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Score> Ord for Entry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .compare(&other.gain)
            .then_with(|| Reverse(self.index).cmp(&Reverse(other.index)))
    }
}

/// Lazy greedy: stale gains are upper bounds by submodularity, so a fresh
/// entry on top of the heap is a true maximizer. Output matches
/// [`greedy_diversify_plain`] exactly.
pub fn greedy_diversify<O: Objective>(answers: &[Tuple], k: usize, obj: &O) -> Result<DiverseResult<O::Score>> {
    let pool = distinct(answers);
    let mut covered = obj.empty();
    let mut heap = BinaryHeap::with_capacity(pool.len());
    for (index, t) in pool.iter().enumerate() {
        heap.push(Entry {
            gain: obj.gain(&covered, t)?,
            index,
            round: 0,
        });
    }
    let mut selected = Vec::new();
    let mut gains = Vec::new();
    let mut round = 0;
    while round < k.min(pool.len()) {
        let top = heap.pop().expect("an unselected candidate remains");
        if top.round == round {
            obj.cover(&mut covered, &pool[top.index])?;
            selected.push(pool[top.index].clone());
            gains.push(top.gain);
            round += 1;
            continue;
        }
        heap.push(Entry {
            gain: obj.gain(&covered, &pool[top.index])?,
            index: top.index,
            round,
        });
    }
    assert_non_increasing(&gains);
    Ok(DiverseResult::from_gains(selected, gains, Mode::Greedy, false))
}

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustive search over all k-subsets. Among optimal subsets the one whose
/// sorted tuple list is lexicographically smallest wins.
pub fn brute_force_diversify<O: Objective>(
    answers: &[Tuple],
    k: usize,
    obj: &O,
    max_subsets: u128,
) -> Result<DiverseResult<O::Score>> {
    let pool = distinct(answers);
    let k = k.min(pool.len());
    let count = binomial(pool.len(), k);
    if count > max_subsets {
        return Err(Error::CapExceeded {
            what: "number of candidate subsets",
            size: count,
            cap: max_subsets,
        });
    }
    let mut best: Option<Best<O::Score>> = None;
    let mut chosen = Vec::with_capacity(k);
    let mut gains = Vec::with_capacity(k);
    search(&pool, k, 0, obj, &obj.empty(), &mut chosen, &mut gains, O::Score::zero(), &mut best)?;
    let (idx, gains, _) = best.expect("at least the empty subset is considered");
    let selected = idx.into_iter().map(|i| pool[i].clone()).collect();
    Ok(DiverseResult::from_gains(selected, gains, Mode::Exact, true))
}

/// Chosen indices, their gains and the total.
type Best<S> = (Vec<usize>, Vec<S>, S);

#[allow(clippy::too_many_arguments)]
fn search<O: Objective>(
    pool: &[Tuple],
    k: usize,
    start: usize,
    obj: &O,
    covered: &O::Covered,
    chosen: &mut Vec<usize>,
    gains: &mut Vec<O::Score>,
    value: O::Score,
    best: &mut Option<Best<O::Score>>,
) -> Result<()> {
    if chosen.len() == k {
        if best.as_ref().is_none_or(|(_, _, b)| value.compare(b) == Ordering::Greater) {
            *best = Some((chosen.clone(), gains.clone(), value));
        }
        return Ok(());
    }
    let needed = k - chosen.len();
    for i in start..=pool.len() - needed {
        let g = obj.gain(covered, &pool[i])?;
        let mut next = covered.clone();
        obj.cover(&mut next, &pool[i])?;
        chosen.push(i);
        gains.push(g);
        search(pool, k, i + 1, obj, &next, chosen, gains, value.plus(g), best)?;
        chosen.pop();
        gains.pop();
    }
    Ok(())
}

/// Greedy maximization of an arbitrary set function, with the same tie rule.
pub fn greedy_set_function<F>(answers: &[Tuple], k: usize, mut f: F) -> Result<Vec<Tuple>>
where
    F: FnMut(&[Tuple]) -> Result<Rational>,
{
    let pool = distinct(answers);
    let mut selected: Vec<Tuple> = Vec::new();
    let mut taken = alloc::vec![false; pool.len()];
    for _ in 0..k.min(pool.len()) {
        let mut best: Option<(usize, Rational)> = None;
        for (i, t) in pool.iter().enumerate() {
            if taken[i] {
                continue;
            }
            selected.push(t.clone());
            let v = f(&selected)?;
            selected.pop();
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        let (i, _) = best.expect("an unselected candidate remains");
        taken[i] = true;
        selected.push(pool[i].clone());
    }
    Ok(selected)
}
