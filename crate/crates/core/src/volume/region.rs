use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::relcore::{DataValue, Tuple};

/// An element of the ground set a ball is drawn from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundPoint {
    Value(DataValue),
    /// A value together with its 1-based position.
    PosValue(DataValue, u32),
    DbTuple(Tuple),
    /// A subset of a finite universe, as a bitmask.
    AttributeSet(u32),
    /// An edge of a tree, by child node id.
    Edge(u32),
}

impl fmt::Display for GroundPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundPoint::Value(v) => write!(f, "{v}"),
            GroundPoint::PosValue(v, p) => write!(f, "{v}@{p}"),
            GroundPoint::DbTuple(t) => write!(f, "{t}"),
            GroundPoint::AttributeSet(m) => write!(f, "set:{m:#b}"),
            GroundPoint::Edge(e) => write!(f, "edge:{e}"),
        }
    }
}

/// A finite set of ground points kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Region {
    points: Vec<GroundPoint>,
}

impl Region {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: impl IntoIterator<Item = GroundPoint>) -> Self {
        let mut points: Vec<GroundPoint> = points.into_iter().collect();
        points.sort();
        points.dedup();
        Region { points }
    }

    pub fn points(&self) -> &[GroundPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &GroundPoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            match self.points[i].cmp(&other.points[j]) {
                Ordering::Less => {
                    out.push(self.points[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.points[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(self.points[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.points[i..]);
        out.extend_from_slice(&other.points[j..]);
        Region { points: out }
    }

    pub fn union_with(&mut self, other: &Region) {
        if !other.is_empty() {
            *self = self.union(other);
        }
    }

    pub fn difference(&self, other: &Region) -> Region {
        let mut out = Vec::with_capacity(self.len());
        let mut j = 0;
        for p in &self.points {
            while j < other.len() && other.points[j] < *p {
                j += 1;
            }
            if j < other.len() && other.points[j] == *p {
                continue;
            }
            out.push(p.clone());
        }
        Region { points: out }
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.difference(&self.difference(other))
    }

    pub fn symmetric_difference(&self, other: &Region) -> Region {
        self.difference(other).union(&other.difference(self))
    }
}

/// A finitely additive measure on finite regions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Measure {
    Count,
    /// Per-point weights; unlisted points weigh `default`.
    Weighted {
        weights: BTreeMap<GroundPoint, Rational>,
        default: Rational,
    },
}

impl Measure {
    pub fn weighted(weights: BTreeMap<GroundPoint, Rational>, default: Rational) -> Result<Self> {
        let zero = Rational::from_integer(0);
        if default < zero {
            return Err(Error::Invalid("the default weight must be non-negative".into()));
        }
        if let Some((p, w)) = weights.iter().find(|(_, w)| **w < zero) {
            return Err(Error::Invalid(alloc::format!("weight {w} of {p} is negative")));
        }
        Ok(Measure::Weighted { weights, default })
    }

    pub fn point(&self, p: &GroundPoint) -> Rational {
        match self {
            Measure::Count => Rational::from_integer(1),
            Measure::Weighted { weights, default } => weights.get(p).copied().unwrap_or(*default),
        }
    }

    pub fn of(&self, region: &Region) -> Rational {
        match self {
            Measure::Count => Rational::from_integer(region.len() as i128),
            Measure::Weighted { .. } => region
                .points()
                .iter()
                .fold(Rational::from_integer(0), |acc, p| acc + self.point(p)),
        }
    }
}
