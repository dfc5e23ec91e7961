//! Volume assignments: balls, measures, diversity and marginals.

mod assignment;
mod euclid;
mod multiattr;
mod region;

pub use assignment::{Ball, VolumeAssignment};
pub use euclid::{mc_ball_union_volume, ContinuousBallSet, EuclideanAssignment, McEstimate};
pub use multiattr::{
    multiattribute_from_volume, volume_from_multiattribute, MultiAttributeWeights, DEFAULT_UNIVERSE_CAP,
};
pub use region::{GroundPoint, Measure, Region};
