use std::cmp::Ordering;
use std::time::Duration;

use crate::quartet::CostBounds;
use crate::tree::LabeledTree;

/// Outcome of a solver run.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub best_tree: LabeledTree,
    pub best_cost: f64,
    pub normalized_score: f64,
    pub bounds: CostBounds,
    pub shapes_evaluated: u64,
    /// Leaf assignments (exact) or candidate trees (hill climbing) costed.
    pub assignments_evaluated: u64,
    /// Size of the tree space covered: `(2n-5)!!` for the exact solver,
    /// distinct trees visited along the accepted moves for hill climbing.
    pub distinct_labeled_trees: u64,
    pub elapsed: Duration,
    /// Accepted costs per restart, in order. Empty for the exact solver.
    pub trajectories: Vec<Vec<f64>>,
}

impl SolverResult {
    /// Equality of everything except the wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.best_tree == other.best_tree
            && self.best_cost.to_bits() == other.best_cost.to_bits()
            && self.normalized_score.to_bits() == other.normalized_score.to_bits()
            && self.shapes_evaluated == other.shapes_evaluated
            && self.assignments_evaluated == other.assignments_evaluated
            && self.distinct_labeled_trees == other.distinct_labeled_trees
            && self.trajectories == other.trajectories
    }
}

/// Total order used to pick among optima: lower cost first, then the
/// lexicographically smaller Newick text.
pub(crate) fn compare_candidates(a: (f64, &str), b: (f64, &str)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1))
}

/// `k!!` for odd `k` (and `0!! = 1`); the number of labeled trees over `n`
/// leaves is `(2n - 5)!!`.
pub fn double_factorial(k: u64) -> u128 {
    (1..=k).rev().step_by(2).map(u128::from).product()
}
