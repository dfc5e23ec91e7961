//! Diversity maximization: greedy, exact and combined-complexity engines.

mod cqnext;
mod greedy;
mod maxplus;
mod objective;

pub use cqnext::{
    cqnext_naive, cqnext_provenance, cqnext_tropical, greedy_combined, CombinedMode, NextAnswer, ProvenancePlan,
    TropicalPlan,
};
pub use greedy::{
    binomial, brute_force_diversify, greedy_diversify, greedy_diversify_plain, greedy_set_function, DiverseResult,
    Mode, DEFAULT_MAX_SUBSETS,
};
pub use objective::{Objective, Score};
