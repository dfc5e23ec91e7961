use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ultrametric::UltrametricTree;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::relcore::{join_values, Interner, Tuple};

pub const DEFAULT_WEITZMAN_CAP: usize = 15;

/// A unary tuple standing for a labelled element.
pub fn element(label: &str) -> Tuple {
    let mut i = Interner::new();
    Tuple::new("X", alloc::vec![i.intern(label)])
}

/// A symmetric matrix with zero diagonal over labelled elements. Tuples are
/// matched to labels by their comma-joined values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    entries: Vec<Vec<Rational>>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, entries: Vec<Vec<Rational>>) -> Result<Self> {
        let n = labels.len();
        if labels.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Invalid("matrix labels must be distinct".into()));
        }
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(alloc::format!("the distance matrix must be {n}x{n}")));
        }
        let zero = Rational::from_integer(0);
        for i in 0..n {
            if entries[i][i] != zero {
                return Err(Error::Invalid(alloc::format!("d({0},{0}) must be 0", labels[i])));
            }
            for j in 0..n {
                if entries[i][j] < zero {
                    return Err(Error::Invalid(alloc::format!(
                        "d({},{}) is negative",
                        labels[i], labels[j]
                    )));
                }
                if entries[i][j] != entries[j][i] {
                    return Err(Error::Invalid(alloc::format!(
                        "the matrix is not symmetric at ({},{})",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(DistanceMatrix { labels, entries })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational {
        self.entries[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn index(&self, t: &Tuple) -> Result<usize> {
        self.index_of(&join_values(&t.values))
            .ok_or_else(|| Error::OutsideUniverse(t.to_string()))
    }
}

/// A distance between tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistanceFn {
    Hamming,
    Matrix(DistanceMatrix),
    Ultrametric(UltrametricTree),
}

impl DistanceFn {
    pub fn distance(&self, a: &Tuple, b: &Tuple) -> Result<Rational> {
        match self {
            DistanceFn::Hamming => Ok(Rational::from_integer(hamming(a, b)? as i128)),
            DistanceFn::Matrix(m) => Ok(m.entry(m.index(a)?, m.index(b)?)),
            DistanceFn::Ultrametric(t) => t.distance(&join_values(&a.values), &join_values(&b.values)),
        }
    }

    fn table(&self, s: &[Tuple]) -> Result<Vec<Vec<Rational>>> {
        s.iter()
            .map(|a| s.iter().map(|b| self.distance(a, b)).collect())
            .collect()
    }
}

/// Number of positions in which two tuples of one relation differ.
pub fn hamming(a: &Tuple, b: &Tuple) -> Result<usize> {
    if a.relation != b.relation || a.arity() != b.arity() {
        return Err(Error::Invalid(alloc::format!(
            "Hamming distance needs tuples of one relation and arity, got {a} and {b}"
        )));
    }
    Ok(a.values.iter().zip(&b.values).filter(|(x, y)| x != y).count())
}

fn distinct(s: &[Tuple]) -> Vec<Tuple> {
    s.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Sum of distances over all ordered pairs, the diagonal included.
pub fn delta_sum(s: &[Tuple], d: &DistanceFn) -> Result<Rational> {
    let s = distinct(s);
    if s.len() <= 1 {
        return Ok(Rational::from_integer(0));
    }
    Ok(d.table(&s)?.iter().flatten().fold(Rational::from_integer(0), |acc, x| acc + x))
}

/// Smallest distance between two distinct elements.
pub fn delta_min(s: &[Tuple], d: &DistanceFn) -> Result<Rational> {
    let s = distinct(s);
    if s.len() <= 1 {
        return Ok(Rational::from_integer(0));
    }
    let t = d.table(&s)?;
    let mut best: Option<Rational> = None;
    for (i, row) in t.iter().enumerate() {
        for &x in &row[i + 1..] {
            best = Some(best.map_or(x, |b| b.min(x)));
        }
    }
    Ok(best.expect("at least one pair"))
}

/// Weitzman diversity by memoized recursion over subsets.
pub fn weitzman(s: &[Tuple], d: &DistanceFn, cap: usize) -> Result<Rational> {
    let s = distinct(s);
    let n = s.len();
    if n > cap || n >= usize::BITS as usize {
        return Err(Error::CapExceeded {
            what: "Weitzman set size (the recursion is exponential)",
            size: n as u128,
            cap: cap as u128,
        });
    }
    if n <= 1 {
        return Ok(Rational::from_integer(0));
    }
    let t = d.table(&s)?;
    let full = (1usize << n) - 1;
    let mut memo = alloc::vec![Rational::from_integer(0); full + 1];
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut best: Option<Rational> = None;
        for a in (0..n).filter(|a| mask & (1 << a) != 0) {
            let rest = mask & !(1 << a);
            let nearest = (0..n)
                .filter(|x| rest & (1 << x) != 0)
                .map(|x| t[a][x])
                .min()
                .expect("rest is non-empty");
            let value = memo[rest] + nearest;
            best = Some(best.map_or(value, |b| b.max(value)));
        }
        memo[mask] = best.expect("mask is non-empty");
    }
    Ok(memo[full])
}
