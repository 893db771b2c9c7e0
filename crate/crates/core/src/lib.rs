//! Exact solver for multi-objective 0-1 integer linear programs.
//!
//! Computes the complete nondominated set by branch-and-bound with
//! linear-relaxation bound sets, objective branching, probing-based variable
//! fixing, optional cover cuts, and a choice of node selection rules.
//! Brute-force references for desk-scale validation live in [`oracle`].

pub mod branching;
pub mod cuts;
pub mod geometry;
pub mod instance;
pub mod local_upper;
pub mod lower_bound;
pub mod lp;
pub mod oracle;
pub mod probing;
pub mod report;
pub mod search;
pub mod upper_bound;

pub use branching::ObMode;
pub use geometry::ObjectivePoint;
pub use instance::MoilpInstance;
pub use probing::ProbingMode;
pub use search::{solve, NodeRule, SolveConfig, SolveOutcome, SolveStats, VarRule};
pub use upper_bound::{FeasibleSolution, UpperBoundSet};
