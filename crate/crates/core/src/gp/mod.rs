//! Minimal tree-based symbolic regression used to exercise the selection
//! operators end to end: expression trees over `{+, -, *, protected /}`,
//! a seeded generational loop, and tournament selection as the
//! aggregate-fitness baseline.

mod data;
mod evolve;
mod tree;

pub use data::Dataset;
pub use evolve::{
    case_fitness, evaluate, evolve, r_squared, tournament_select, EvolutionConfig,
    EvolveOutcome, GenerationStats, SelectionMethod,
};
pub use tree::{BinOp, ExprTree, Node};
