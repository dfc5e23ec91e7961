//! Conversions between volume assignments and multi-attribute diversity.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::assignment::VolumeAssignment;
use super::region::{GroundPoint, Measure, Region};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::relcore::Tuple;

pub const DEFAULT_UNIVERSE_CAP: usize = 16;

/// Non-negative weights on subsets of a finite universe, stored sparsely.
/// Subsets are bitmasks over positions in `universe`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiAttributeWeights {
    universe: Vec<Tuple>,
    lambda: BTreeMap<u32, Rational>,
}

impl MultiAttributeWeights {
    pub fn new(universe: Vec<Tuple>, lambda: BTreeMap<u32, Rational>) -> Result<Self> {
        if universe.len() > 32 {
            return Err(Error::CapExceeded {
                what: "universe size",
                size: universe.len() as u128,
                cap: 32,
            });
        }
        if universe.iter().collect::<BTreeSet<_>>().len() != universe.len() {
            return Err(Error::Invalid("universe elements must be distinct".into()));
        }
        let full = if universe.len() == 32 { u32::MAX } else { (1u32 << universe.len()) - 1 };
        let zero = Rational::from_integer(0);
        for (&mask, w) in &lambda {
            if *w < zero {
                return Err(Error::Invalid(alloc::format!("weight {w} is negative")));
            }
            if mask == 0 || mask & !full != 0 {
                return Err(Error::Invalid(alloc::format!(
                    "subset {mask:#b} is empty or leaves the universe"
                )));
            }
        }
        let lambda = lambda.into_iter().filter(|(_, w)| *w != zero).collect();
        Ok(MultiAttributeWeights { universe, lambda })
    }

    pub fn universe(&self) -> &[Tuple] {
        &self.universe
    }

    /// Non-zero weights by subset mask.
    pub fn lambda(&self) -> &BTreeMap<u32, Rational> {
        &self.lambda
    }

    pub fn mask_of(&self, s: &[Tuple]) -> Result<u32> {
        s.iter().try_fold(0u32, |m, t| {
            let i = self
                .universe
                .iter()
                .position(|x| x == t)
                .ok_or_else(|| Error::OutsideUniverse(alloc::string::ToString::to_string(t)))?;
            Ok(m | (1 << i))
        })
    }

    /// Sum of the weights of all subsets meeting `s`.
    pub fn value(&self, s: &[Tuple]) -> Result<Rational> {
        let m = self.mask_of(s)?;
        Ok(self.value_of_mask(m))
    }

    pub fn value_of_mask(&self, m: u32) -> Rational {
        self.lambda
            .iter()
            .filter(|(a, _)| **a & m != 0)
            .fold(Rational::from_integer(0), |acc, (_, w)| acc + w)
    }

    /// Elements of the subset `mask`.
    pub fn members(&self, mask: u32) -> Vec<&Tuple> {
        (0..self.universe.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &self.universe[i])
            .collect()
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap.min(32) {
        return Err(Error::CapExceeded {
            what: "universe size",
            size: n as u128,
            cap: cap.min(32) as u128,
        });
    }
    Ok(())
}

/// The assignment whose ground points are the weighted subsets and whose
/// ball of `x` holds the subsets containing `x`. Subsets of weight zero are
/// left out of every ball, which changes no measure.
pub fn volume_from_multiattribute(maw: &MultiAttributeWeights, cap: usize) -> Result<VolumeAssignment> {
    check_cap(maw.universe.len(), cap)?;
    let balls = maw
        .universe
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let region = Region::from_points(
                maw.lambda
                    .keys()
                    .filter(|a| **a & (1 << i) != 0)
                    .map(|a| GroundPoint::AttributeSet(*a)),
            );
            (x.clone(), region)
        })
        .collect();
    let weights = maw
        .lambda
        .iter()
        .map(|(a, w)| (GroundPoint::AttributeSet(*a), *w))
        .collect();
    let measure = Measure::weighted(weights, Rational::from_integer(0))?;
    Ok(VolumeAssignment::table("multiattr", balls, measure))
}

/// Weights where each subset `A` receives the measure of the points lying in
/// exactly the balls of the elements of `A`.
pub fn multiattribute_from_volume(
    v: &VolumeAssignment,
    universe: &[Tuple],
    cap: usize,
) -> Result<MultiAttributeWeights> {
    check_cap(universe.len(), cap)?;
    let mut owners: BTreeMap<GroundPoint, u32> = BTreeMap::new();
    for (i, x) in universe.iter().enumerate() {
        for p in v.ball(x)?.points() {
            *owners.entry(p.clone()).or_default() |= 1 << i;
        }
    }
    let mut lambda: BTreeMap<u32, Rational> = BTreeMap::new();
    for (p, mask) in owners {
        *lambda.entry(mask).or_insert_with(|| Rational::from_integer(0)) += v.measure.point(&p);
    }
    MultiAttributeWeights::new(universe.to_vec(), lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn x(name: &str) -> Tuple {
        Tuple::parse("X", &[name])
    }

    fn int(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn zero_weights_give_zero_volume() {
        let maw = MultiAttributeWeights::new(vec![x("a"), x("b")], BTreeMap::new()).unwrap();
        let v = volume_from_multiattribute(&maw, DEFAULT_UNIVERSE_CAP).unwrap();
        assert_eq!(v.diversity(&[x("a"), x("b")]).unwrap(), int(0));
    }

    #[test]
    fn single_entry() {
        let maw = MultiAttributeWeights::new(vec![x("a")], [(1u32, int(1))].into()).unwrap();
        let v = volume_from_multiattribute(&maw, DEFAULT_UNIVERSE_CAP).unwrap();
        assert_eq!(v.diversity(&[x("a")]).unwrap(), int(1));
        assert_eq!(maw.value(&[x("a")]).unwrap(), int(1));
    }

    #[test]
    fn disjoint_and_identical_balls() {
        let u = vec![Tuple::parse("R", &["a", "b"]), Tuple::parse("R", &["c", "d"])];
        let maw = multiattribute_from_volume(&VolumeAssignment::elem(), &u, DEFAULT_UNIVERSE_CAP).unwrap();
        assert_eq!(maw.lambda(), &[(1u32, int(2)), (2u32, int(2))].into());
        let u = vec![Tuple::parse("R", &["a", "b"]), Tuple::parse("R", &["b", "a"])];
        let maw = multiattribute_from_volume(&VolumeAssignment::elem(), &u, DEFAULT_UNIVERSE_CAP).unwrap();
        assert_eq!(maw.lambda(), &[(3u32, int(2))].into());
    }

    #[test]
    fn caps_and_validation() {
        let u: Vec<Tuple> = (0..17).map(|i| x(&alloc::format!("e{i}"))).collect();
        assert!(matches!(
            multiattribute_from_volume(&VolumeAssignment::elem(), &u, DEFAULT_UNIVERSE_CAP),
            Err(Error::CapExceeded { .. })
        ));
        assert!(MultiAttributeWeights::new(vec![x("a")], [(2u32, int(1))].into()).is_err());
        assert!(MultiAttributeWeights::new(vec![x("a")], [(1u32, int(-1))].into()).is_err());
        assert!(MultiAttributeWeights::new(vec![x("a"), x("a")], BTreeMap::new()).is_err());
    }
}
