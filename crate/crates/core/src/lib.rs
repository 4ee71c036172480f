//! Parent selection operators for genetic programming.
//!
//! The crate implements lexicase selection and its probabilistic
//! approximation: instead of running repeated selection events, the
//! probabilistic form computes a selection distribution over the Pareto
//! set boundaries of the population and samples every parent from it in
//! one shot. Both operators come in epsilon-relaxed variants for
//! continuous fitness.
//!
//! Modules:
//!
//! * [`matrix`] — fitness matrices, duplicate preselection, case
//!   downsampling.
//! * [`lexicase`] — baseline lexicase and epsilon-lexicase selection
//!   events, MAD-based epsilon.
//! * [`pareto`] — dominance predicates and the elitism-sorted boundary
//!   search.
//! * [`plexicase`] — probability assignment, alpha manipulation, and
//!   one-shot parent sampling.
//! * [`oracle`] — exact lexicase selection probabilities (memoized
//!   recursion), Monte-Carlo estimation, and overlap/divergence metrics.
//! * [`gp`] — a small tree-based symbolic-regression engine that
//!   exercises the operators end to end.
//!
//! The crate is `no_std`-compatible (requires `alloc`). Wall-clock
//! timing inside [`gp::evolve`] is only collected when the `std` feature
//! is enabled; without it the timing fields are zero.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod gp;
pub mod lexicase;
pub mod matrix;
pub mod oracle;
pub mod pareto;
pub mod plexicase;
pub mod rng;

pub use error::{Error, Result};
pub use lexicase::EpsilonVector;
pub use matrix::{CaseSubset, DedupIndex, FitnessMatrix, Orientation};
pub use pareto::BoundarySet;
pub use plexicase::SelectionDistribution;
pub use rng::RngSeed;
