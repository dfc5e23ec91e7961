use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::region::{GroundPoint, Measure, Region};
use crate::engine::ProvenanceMap;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::relcore::Tuple;

/// How a tuple is mapped to its ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ball {
    /// The set of values of the tuple.
    Elem,
    /// The set of (value, position) pairs of the tuple.
    Pos,
    /// The which-provenance of an answer.
    Provenance(ProvenanceMap),
    /// An explicit table over a finite universe.
    Table(BTreeMap<Tuple, Region>),
}

/// A ball function paired with a measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeAssignment {
    pub name: String,
    pub ball: Ball,
    pub measure: Measure,
}

impl VolumeAssignment {
    pub fn elem() -> Self {
        VolumeAssignment {
            name: "elem".into(),
            ball: Ball::Elem,
            measure: Measure::Count,
        }
    }

    pub fn pos() -> Self {
        VolumeAssignment {
            name: "pos".into(),
            ball: Ball::Pos,
            measure: Measure::Count,
        }
    }

    pub fn elem_weighted(measure: Measure) -> Self {
        VolumeAssignment {
            name: "elem-w".into(),
            ball: Ball::Elem,
            measure,
        }
    }

    pub fn pos_weighted(measure: Measure) -> Self {
        VolumeAssignment {
            name: "pos-w".into(),
            ball: Ball::Pos,
            measure,
        }
    }

    pub fn provenance(map: ProvenanceMap) -> Self {
        VolumeAssignment {
            name: "provenance".into(),
            ball: Ball::Provenance(map),
            measure: Measure::Count,
        }
    }

    pub fn table(name: &str, balls: BTreeMap<Tuple, Region>, measure: Measure) -> Self {
        VolumeAssignment {
            name: name.into(),
            ball: Ball::Table(balls),
            measure,
        }
    }

    /// The declared universe for table and provenance balls; `None` when
    /// every tuple has a ball.
    pub fn universe(&self) -> Option<Vec<Tuple>> {
        match &self.ball {
            Ball::Elem | Ball::Pos => None,
            Ball::Provenance(p) => Some(p.iter().map(|(t, _)| t.clone()).collect()),
            Ball::Table(t) => Some(t.keys().cloned().collect()),
        }
    }

    pub fn ball(&self, t: &Tuple) -> Result<Region> {
        match &self.ball {
            Ball::Elem => Ok(Region::from_points(t.values.iter().cloned().map(GroundPoint::Value))),
            Ball::Pos => Ok(Region::from_points(
                t.values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| GroundPoint::PosValue(v.clone(), i as u32 + 1)),
            )),
            Ball::Provenance(p) => p
                .get(t)
                .map(|w| Region::from_points(w.iter().cloned().map(GroundPoint::DbTuple)))
                .ok_or_else(|| Error::OutsideUniverse(t.to_string())),
            Ball::Table(table) => table
                .get(t)
                .cloned()
                .ok_or_else(|| Error::OutsideUniverse(t.to_string())),
        }
    }

    /// Union of the balls of `s`.
    pub fn covered(&self, s: &[Tuple]) -> Result<Region> {
        let mut region = Region::new();
        for t in s {
            region.union_with(&self.ball(t)?);
        }
        Ok(region)
    }

    /// Measure of the union of the balls; zero for the empty set.
    pub fn diversity(&self, s: &[Tuple]) -> Result<Rational> {
        Ok(self.measure.of(&self.covered(s)?))
    }

    /// Gain of adding `t` to `s`, measured as the part of its ball not yet covered.
    pub fn marginal(&self, s: &[Tuple], t: &Tuple) -> Result<Rational> {
        self.marginal_over(&self.covered(s)?, t)
    }

    /// Gain of adding `t` given an already covered region.
    pub fn marginal_over(&self, covered: &Region, t: &Tuple) -> Result<Rational> {
        Ok(self.measure.of(&self.ball(t)?.difference(covered)))
    }

    /// Measure of the symmetric difference of two balls.
    pub fn sym_diff_distance(&self, a: &Tuple, b: &Tuple) -> Result<Rational> {
        Ok(self.measure.of(&self.ball(a)?.symmetric_difference(&self.ball(b)?)))
    }

    /// Gain of adding `a` to `{b}`; asymmetric in general.
    pub fn marginal_distance(&self, a: &Tuple, b: &Tuple) -> Result<Rational> {
        Ok(self.measure.of(&self.ball(a)?.difference(&self.ball(b)?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::DataValue;

    fn t(a: &str, b: &str) -> Tuple {
        Tuple::parse("R", &[a, b])
    }

    fn int(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    fn d1() -> Vec<Tuple> {
        alloc::vec![t("a", "a"), t("a", "b"), t("b", "a")]
    }

    fn d2() -> Vec<Tuple> {
        let mut d = d1();
        d.push(t("b", "b"));
        d
    }

    fn d3() -> Vec<Tuple> {
        alloc::vec![t("a", "b"), t("a", "c")]
    }

    fn weights() -> Measure {
        let mut w = BTreeMap::new();
        w.insert(GroundPoint::PosValue(DataValue::Text("c".into()), 2), int(3));
        Measure::weighted(w, int(1)).unwrap()
    }

    #[test]
    fn balls() {
        assert_eq!(
            VolumeAssignment::elem().ball(&t("a", "a")).unwrap(),
            Region::from_points([GroundPoint::Value(DataValue::Text("a".into()))])
        );
        let pos = VolumeAssignment::pos().ball(&t("a", "b")).unwrap();
        assert_eq!(pos.points()[0], GroundPoint::PosValue(DataValue::Text("a".into()), 1));
        assert_eq!(pos.points()[1], GroundPoint::PosValue(DataValue::Text("b".into()), 2));
    }

    #[test]
    fn diversity_of_the_small_databases() {
        let elem = VolumeAssignment::elem();
        let pos = VolumeAssignment::pos();
        let pos_w = VolumeAssignment::pos_weighted(weights());
        assert_eq!(elem.diversity(&d1()).unwrap(), int(2));
        assert_eq!(elem.diversity(&d2()).unwrap(), int(2));
        assert_eq!(elem.diversity(&d3()).unwrap(), int(3));
        assert_eq!(pos.diversity(&d1()).unwrap(), int(4));
        assert_eq!(pos.diversity(&d2()).unwrap(), int(4));
        assert_eq!(pos.diversity(&d3()).unwrap(), int(3));
        assert_eq!(pos_w.diversity(&d1()).unwrap(), int(4));
        assert_eq!(pos_w.diversity(&d3()).unwrap(), int(5));
        assert_eq!(elem.diversity(&[]).unwrap(), int(0));
    }

    #[test]
    fn marginals_and_distances() {
        let elem = VolumeAssignment::elem();
        let ab = t("a", "b");
        let bc = t("b", "c");
        assert_eq!(elem.marginal(core::slice::from_ref(&ab), &bc).unwrap(), int(1));
        assert_eq!(elem.marginal(core::slice::from_ref(&ab), &ab).unwrap(), int(0));
        assert_eq!(elem.marginal(&[], &ab).unwrap(), int(2));
        assert_eq!(elem.sym_diff_distance(&ab, &bc).unwrap(), int(2));
        assert_eq!(elem.sym_diff_distance(&ab, &ab).unwrap(), int(0));
        assert_eq!(elem.marginal_distance(&ab, &bc).unwrap(), int(1));
        assert_eq!(elem.marginal_distance(&ab, &ab).unwrap(), int(0));
        assert_eq!(VolumeAssignment::pos().sym_diff_distance(&ab, &t("b", "a")).unwrap(), int(4));
    }

    #[test]
    fn tables_reject_outsiders() {
        let v = VolumeAssignment::table("t", BTreeMap::new(), Measure::Count);
        assert!(matches!(v.ball(&t("a", "a")), Err(Error::OutsideUniverse(_))));
        assert_eq!(v.universe(), Some(Vec::new()));
    }
}
