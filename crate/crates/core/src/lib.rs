//! Solvers for the minimum quartet tree cost problem.
//!
//! Given `n >= 4` objects and their pairwise dissimilarities, find the full
//! unrooted binary tree with the objects as leaves that minimizes the total
//! cost of the quartet topologies it embeds. [`solve_exact`] enumerates every
//! tree shape and leaf assignment and is practical up to about a dozen
//! objects; [`solve_hill_climbing`] handles anything larger.

pub mod distance;
pub mod error;
pub mod exact;
pub mod hill;
pub mod io;
pub mod newick;
pub mod quartet;
pub mod shapes;
pub mod solution;
pub mod tree;

pub use distance::DistanceMatrix;
pub use error::{Error, Result};
pub use exact::{count_labeled_trees, enumerate_assignments, solve_exact, ExactConfig, Pruning};
pub use hill::{neighbors, random_tree, solve_hill_climbing, Neighborhood, SearchConfig};
pub use io::{parse_distance_matrix, MatrixFormat, RunReport};
pub use newick::{parse_newick, parse_newick_with_labels, to_newick};
pub use quartet::{
    coefficient_matrix, consistent_topology, cost_bounds, normalized_score, quartet_cost, tree_cost,
    tree_cost_bruteforce, CoefficientMatrix, CostBounds, Quartet,
};
pub use shapes::{
    canonical_code, generate_shapes, initial_caterpillar, invariant_signature, CanonicalCode,
    InvariantSignature, ShapeConfig, TopologyShape,
};
pub use solution::{double_factorial, SolverResult};
pub use tree::{
    enumerate_labeled_trees, from_complete_matrix, to_complete_matrix, validate_tree, CompleteMatrix,
    LabeledTree, NodeId, TreeViolation,
};
