//! Answer enumeration and which-provenance.

mod local;
mod naive;
mod provenance;
mod tree;

pub use local::{Assignment, LocalRel};
pub use naive::{atom_relation, enumerate_answers, homomorphism_count, AnswerSet, NaiveJoin};
pub use provenance::{provenance_map, ProvenanceMap, DEFAULT_EXTENSION_LIMIT};
pub use tree::{connex_answers, td_answers, yannakakis_answers, ReducedTree};
