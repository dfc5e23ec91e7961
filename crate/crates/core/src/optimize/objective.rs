use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Debug;

use crate::error::Result;
use crate::rational::{to_f64, Rational};
use crate::relcore::Tuple;
use crate::volume::{EuclideanAssignment, Region, VolumeAssignment};

/// A totally ordered additive score.
pub trait Score: Copy + Debug + PartialEq {
    fn zero() -> Self;
    fn plus(self, other: Self) -> Self;
    fn compare(&self, other: &Self) -> Ordering;
    fn to_f64(self) -> f64;
}

impl Score for Rational {
    fn zero() -> Self {
        Rational::from_integer(0)
    }

    fn plus(self, other: Self) -> Self {
        self + other
    }

    fn compare(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn to_f64(self) -> f64 {
        to_f64(&self)
    }
}

impl Score for f64 {
    fn zero() -> Self {
        0.0
    }

    fn plus(self, other: Self) -> Self {
        self + other
    }

    fn compare(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn to_f64(self) -> f64 {
        self
    }
}

/// A monotone submodular set function given by marginal gains against an
/// incrementally grown covered state.
pub trait Objective {
    type Score: Score;
    type Covered: Clone;

    fn empty(&self) -> Self::Covered;
    fn gain(&self, covered: &Self::Covered, t: &Tuple) -> Result<Self::Score>;
    fn cover(&self, covered: &mut Self::Covered, t: &Tuple) -> Result<()>;
}

impl Objective for VolumeAssignment {
    type Score = Rational;
    type Covered = Region;

    fn empty(&self) -> Region {
        Region::new()
    }

    fn gain(&self, covered: &Region, t: &Tuple) -> Result<Rational> {
        self.marginal_over(covered, t)
    }

    fn cover(&self, covered: &mut Region, t: &Tuple) -> Result<()> {
        covered.union_with(&self.ball(t)?);
        Ok(())
    }
}

impl Objective for EuclideanAssignment {
    type Score = f64;
    type Covered = Vec<Vec<f64>>;

    fn empty(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }

    fn gain(&self, covered: &Vec<Vec<f64>>, t: &Tuple) -> Result<f64> {
        self.marginal_over(covered, t)
    }

    fn cover(&self, covered: &mut Vec<Vec<f64>>, t: &Tuple) -> Result<()> {
        covered.push(self.center(t)?);
        Ok(())
    }
}
