//! Conjunctive-query evaluation and diversification of query answers under
//! volume-based diversity functions.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! anything else touching the operating system live in the `diverse-cq`
//! companion crate.
//!
//! Layout:
//!
//! * [`relcore`]: data values, tuples, schemas and indexed databases.
//! * [`query`]: conjunctive-query AST, parser, join trees and tree decompositions.
//! * [`engine`]: answer enumeration (naive and Yannakakis) and which-provenance.
//! * [`volume`]: volume assignments, diversity, marginals and conversions.
//! * [`baselines`]: distance-based and Weitzman diversity.
//! * [`optimize`]: greedy, exact and combined-complexity diversification.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod baselines;
pub mod engine;
pub mod error;
pub mod optimize;
pub mod query;
pub mod rational;
pub mod relcore;
pub mod volume;

pub use error::{Error, Result};
pub use rational::Rational;
pub use relcore::{DataValue, Database, DatabaseBuilder, Interner, Schema, Tuple};
