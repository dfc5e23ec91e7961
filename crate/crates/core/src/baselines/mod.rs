//! Distance-based diversity and Weitzman diversity.

mod distance;
mod ultrametric;

pub use distance::{delta_min, delta_sum, element, hamming, weitzman, DistanceFn, DistanceMatrix, DEFAULT_WEITZMAN_CAP};
pub use ultrametric::{
    ultrametric_to_volume, ultrametric_tree_from_matrix, weitzman_ultrametric, UltrametricNode, UltrametricTree,
};
