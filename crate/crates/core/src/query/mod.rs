//! Conjunctive queries: syntax tree, parser and structural analysis.

mod ast;
mod decomposition;
mod parser;

pub use ast::{Atom, ConjunctiveQuery, EqualityRewrite, VarId};
pub use decomposition::{
    free_connex_join_tree, free_connex_subtree, gyo_join_tree, validate_tree_decomposition, FreeConnex,
    TreeDecomposition, Violation,
};
pub use parser::{parse_cq, parse_cq_with_schema};
