//! Approximate graph propagation.
//!
//! Computes `pi = sum_i w_i (D^-a A D^-b)^i x` for a family of proximity
//! measures (transition probabilities, PageRank/PPR, single-target PPR,
//! heat-kernel PageRank, Katz, and decoupled GNN feature propagation).
//!
//! Two engines share one level-synchronous residue/reserve loop:
//!
//! * [`basic_propagate`] pushes every residue to every neighbour. It is exact
//!   up to the level cut-off and serves as ground truth.
//! * [`randomized_propagate`] pushes deterministically only where the pushed
//!   mass is at least `epsilon`; the remaining neighbours are reached through
//!   subset sampling over degree-sorted adjacency lists, each hit adding
//!   exactly `epsilon`. The estimator is unbiased.
//!
//! On top of the engines sit sweep-cut local clustering ([`clustering`]),
//! column-parallel feature propagation ([`features`]) and the evaluation
//! harness with independent oracles ([`eval`]).

pub mod clustering;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod io;
pub mod propagation;
pub mod sampling;
pub mod weights;

pub use clustering::{normalize_scores, sweep_cut, SweepResult};
pub use error::{AgpError, Result};
pub use features::{propagate_features, FeatureMatrix, FeatureResult};
pub use graph::{DegreeGroup, Graph, Layout, NodeId};
pub use propagation::basic::basic_propagate;
pub use propagation::randomized::{randomized_propagate, RandomizedConfig};
pub use propagation::{Engine, Exponents, PropagationResult, Provenance, SparseSignal};
pub use sampling::RandomStreams;
pub use weights::{select_level_count, Measure, WeightScheme};
