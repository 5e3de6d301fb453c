//! Deterministic, differentiable rationale extraction on binary factor
//! graphs.
//!
//! The stack, bottom to top:
//!
//! * [`graph`]: binary variables, hard-constraint factor kinds (exactly-one,
//!   at-most-one, budget, pairwise bonus, budgeted chain), validated factor
//!   graphs, and builders for highlight and matching problems.
//! * [`oracles`]: exact MAP maximizers per factor kind with documented tie
//!   breaks, plus brute-force enumeration as the universal reference.
//! * [`solver`]: SparseMAP (an active-set method over a single factor's
//!   convex hull) and LP-SparseMAP (consensus optimization across factors),
//!   both with vector-Jacobian products so gradients flow through the
//!   structured layer.
//! * [`sampling`]: exact Gibbs enumeration on small graphs, perturb-and-MAP
//!   sampling, and Gumbel matching.
//! * [`rationalizer`]: toy end-to-end highlight and matching rationalizers
//!   with manual backpropagation and planted-ground-truth synthetic tasks.
//! * [`metrics`], [`io`], [`cli`]: token-F1 evaluation, JSON file formats,
//!   and the command-line surface.
//! * [`selfcheck`]: randomized oracle suites certifying every layer.
//!
//! Everything is seeded and deterministic: identical inputs produce
//! identical outputs, including sampled structures and training curves.
//!
//! # Example
//!
//! ```
//! use rationex::graph::{build_highlight_graph, Scores};
//! use rationex::solver::{lp_sparsemap_solve, ConsensusConfig};
//!
//! // pick ~2 of 4 tokens, contiguity lightly encouraged
//! let graph = build_highlight_graph(4, 50.0, 0.1)?;
//! let scores = Scores::new(vec![2.0, 1.5, -1.0, 0.2])?;
//! let state = lp_sparsemap_solve(&graph, &scores, &ConsensusConfig::inference())?;
//! assert!(state.u.iter().sum::<f64>() <= 2.0 + 1e-3);
//! # Ok::<(), rationex::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod oracles;
pub mod rationalizer;
pub mod sampling;
pub mod selfcheck;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{
    build_highlight_graph, build_matching_graph, AlignmentMatrix, Assignment, Factor, FactorGraph,
    FactorKind, MatchingVariant, Scores,
};
pub use solver::{
    lp_sparsemap_solve, lp_sparsemap_vjp, sparsemap_solve, sparsemap_vjp, ConsensusConfig,
    ConsensusState, SparseSolution,
};
