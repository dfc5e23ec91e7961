//! Lebesgue volume of unions of Euclidean balls.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::relcore::Tuple;

/// Balls of one common radius around points of equal dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousBallSet {
    centers: Vec<Vec<f64>>,
    radius: f64,
}

impl ContinuousBallSet {
    pub fn new(centers: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid("the radius must be positive and finite".into()));
        }
        if let Some(first) = centers.first() {
            if first.is_empty() {
                return Err(Error::Invalid("centers need at least one coordinate".into()));
            }
            if let Some(bad) = centers.iter().find(|c| c.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        if centers.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("coordinates must be finite".into()));
        }
        Ok(ContinuousBallSet { centers, radius })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dimension(&self) -> Option<usize> {
        self.centers.first().map(Vec::len)
    }

    fn contains(&self, p: &[f64]) -> bool {
        let r2 = self.radius * self.radius;
        self.centers.iter().any(|c| dist2(c, p) <= r2)
    }
}

/// An estimate with its standard error; exact results have zero error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn interval_union(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in intervals {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Volume of the union of the balls. One-dimensional inputs are measured
/// exactly; higher dimensions sample the bounding box.
pub fn mc_ball_union_volume(balls: &ContinuousBallSet, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    let r = balls.radius;
    let Some(k) = balls.dimension() else {
        return Ok(McEstimate {
            value: 0.0,
            stderr: 0.0,
            samples: 0,
        });
    };
    if k == 1 {
        let merged = interval_union(balls.centers.iter().map(|c| (c[0] - r, c[0] + r)).collect());
        return Ok(McEstimate {
            value: merged.iter().map(|(lo, hi)| hi - lo).sum(),
            stderr: 0.0,
            samples: 0,
        });
    }
    let lo: Vec<f64> = (0..k)
        .map(|i| balls.centers.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min) - r)
        .collect();
    let hi: Vec<f64> = (0..k)
        .map(|i| balls.centers.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max) + r)
        .collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = alloc::vec![0.0; k];
    let mut hits = 0u64;
    for _ in 0..samples {
        for i in 0..k {
            point[i] = lo[i] + unit(&mut rng) * (hi[i] - lo[i]);
        }
        if balls.contains(&point) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        value: box_volume * p,
        stderr: box_volume * libm::sqrt(p * (1.0 - p) / samples as f64),
        samples,
    })
}

/// Balls of a fixed radius around tuples read as points of ℝ^k.
#[derive(Clone, Debug, PartialEq)]
pub struct EuclideanAssignment {
    pub radius: f64,
    pub samples: u64,
    pub seed: u64,
}

impl EuclideanAssignment {
    pub fn new(radius: f64, samples: u64, seed: u64) -> Result<Self> {
        ContinuousBallSet::new(Vec::new(), radius)?;
        if samples == 0 {
            return Err(Error::Invalid("at least one sample is required".into()));
        }
        Ok(EuclideanAssignment { radius, samples, seed })
    }

    /// The coordinates of a tuple whose values are all numbers.
    pub fn center(&self, t: &Tuple) -> Result<Vec<f64>> {
        t.values
            .iter()
            .map(|v| {
                v.as_number()
                    .map(crate::rational::to_f64)
                    .ok_or_else(|| Error::OutsideUniverse(t.to_string()))
            })
            .collect()
    }

    pub fn centers(&self, s: &[Tuple]) -> Result<Vec<Vec<f64>>> {
        s.iter().map(|t| self.center(t)).collect()
    }

    pub fn diversity(&self, s: &[Tuple]) -> Result<McEstimate> {
        let balls = ContinuousBallSet::new(self.centers(s)?, self.radius)?;
        mc_ball_union_volume(&balls, self.samples, self.seed)
    }

    /// Volume of the ball of `t` outside the balls around `covered`.
    ///
    /// The sample points depend only on `t` and the seed, so the estimate
    /// never increases as `covered` grows.
    pub fn marginal_over(&self, covered: &[Vec<f64>], t: &Tuple) -> Result<f64> {
        let c = self.center(t)?;
        let k = c.len();
        if let Some(bad) = covered.iter().find(|x| x.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: bad.len(),
            });
        }
        let r = self.radius;
        let others = ContinuousBallSet::new(covered.to_vec(), r)?;
        if k == 1 {
            let own = (c[0] - r, c[0] + r);
            let merged = interval_union(covered.iter().map(|x| (x[0] - r, x[0] + r)).collect());
            let overlap: f64 = merged
                .iter()
                .map(|(lo, hi)| (hi.min(own.1) - lo.max(own.0)).max(0.0))
                .sum();
            return Ok(2.0 * r - overlap);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(t.to_string().as_bytes()));
        let mut point = alloc::vec![0.0; k];
        let mut hits = 0u64;
        for _ in 0..self.samples {
            for i in 0..k {
                point[i] = c[i] - r + unit(&mut rng) * 2.0 * r;
            }
            if dist2(&point, &c) <= r * r && !others.contains(&point) {
                hits += 1;
            }
        }
        let cube = libm::pow(2.0 * r, k as f64);
        Ok(cube * hits as f64 / self.samples as f64)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
