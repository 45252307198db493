//! Exhaustive search over shapes and leaf assignments.
//!
//! For each shape the coefficient block is computed once with objects placed
//! in position order. Any other assignment permutes the leaf rows and
//! columns of the complete matrix, so the coefficient of objects `x` and `y`
//! is the positional coefficient of the slots they occupy and no
//! coefficient needs recomputing. Assignments are enumerated depth-first,
//! adding each pair's contribution as the second object of the pair is
//! placed.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use web_time::Instant;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::newick::to_newick;
use crate::quartet::{coefficient_matrix, cost_bounds, cost_tolerance, normalized_score, tree_cost};
use crate::shapes::{generate_shapes, ShapeConfig, TopologyShape};
use crate::solution::{compare_candidates, double_factorial, SolverResult};

pub const DEFAULT_MAX_EXACT_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pruning {
    /// Every permutation of objects over leaf positions.
    None,
    /// Skip permutations that only swap the two leaves of a cherry.
    Cherries,
}

#[derive(Debug, Clone, Copy)]
pub struct ExactConfig {
    pub max_n: usize,
    pub pruning: Pruning,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            max_n: DEFAULT_MAX_EXACT_N,
            pruning: Pruning::Cherries,
        }
    }
}

/// Progress snapshot, emitted each time a shape is finished.
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub shapes_total: usize,
    pub shapes_completed: usize,
    pub assignments_evaluated: u64,
    pub elapsed: Duration,
}

impl Progress {
    pub fn assignments_per_second(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if secs > 0.0 {
            self.assignments_evaluated as f64 / secs
        } else {
            0.0
        }
    }
}

/// For each leaf position, the earlier position on the same internal node.
fn cherry_partners(shape: &TopologyShape) -> Vec<Option<usize>> {
    let positions = shape.positions();
    (0..positions.len())
        .map(|p| (p > 0 && positions[p - 1] == positions[p]).then(|| p - 1))
        .collect()
}

/// Leaf assignments of a shape in lexicographic order. Item `a` places
/// object `a[p]` at leaf position `p`.
pub struct Assignments {
    n: usize,
    partner: Vec<Option<usize>>,
    pruning: Pruning,
    current: Vec<usize>,
    used: Vec<bool>,
    next_try: Vec<usize>,
    depth: usize,
    done: bool,
}

impl Assignments {
    fn release(&mut self) {
        self.depth -= 1;
        let obj = self.current[self.depth];
        self.used[obj] = false;
        self.next_try[self.depth] = obj + 1;
    }
}

impl Iterator for Assignments {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        loop {
            if self.done {
                return None;
            }
            if self.depth == self.n {
                let out = self.current.clone();
                self.release();
                return Some(out);
            }
            let d = self.depth;
            let mut lo = self.next_try[d];
            if let (Pruning::Cherries, Some(q)) = (self.pruning, self.partner[d]) {
                lo = lo.max(self.current[q] + 1);
            }
            match (lo..self.n).find(|&o| !self.used[o]) {
                Some(o) => {
                    self.current[d] = o;
                    self.used[o] = true;
                    self.depth += 1;
                    if self.depth < self.n {
                        self.next_try[self.depth] = 0;
                    }
                }
                None if d == 0 => self.done = true,
                None => self.release(),
            }
        }
    }
}

pub fn enumerate_assignments(shape: &TopologyShape, pruning: Pruning) -> Assignments {
    let n = shape.n();
    Assignments {
        n,
        partner: cherry_partners(shape),
        pruning,
        current: vec![0; n],
        used: vec![false; n],
        next_try: vec![0; n],
        depth: 0,
        done: false,
    }
}

struct Incumbent {
    cost: f64,
    newick: String,
    shape: usize,
    assignment: Vec<usize>,
}

/// Depth-first search over the assignments of one shape whose first
/// position holds a fixed object.
struct BlockSearch<'a> {
    n: usize,
    coef: &'a [f64],
    dist: &'a DistanceMatrix,
    partner: &'a [Option<usize>],
    pruning: Pruning,
    tolerance: f64,
    shape_index: usize,
    shape: &'a TopologyShape,
    assign: Vec<usize>,
    used: Vec<bool>,
    position_of: Vec<usize>,
    evaluated: u64,
    running: f64,
    best: Option<Incumbent>,
}

impl BlockSearch<'_> {
    fn dfs(&mut self, depth: usize, partial: f64) {
        if depth == self.n {
            self.evaluated += 1;
            self.visit_leaf(partial);
            return;
        }
        let lo = match (self.pruning, self.partner[depth]) {
            (Pruning::Cherries, Some(q)) => self.assign[q] + 1,
            _ => 0,
        };
        for obj in lo..self.n {
            if self.used[obj] {
                continue;
            }
            let mut add = 0.0;
            for q in 0..depth {
                add += self.coef[q * self.n + depth] * self.dist.get(self.assign[q], obj);
            }
            self.assign[depth] = obj;
            self.used[obj] = true;
            self.dfs(depth + 1, partial + add);
            self.used[obj] = false;
        }
    }

    fn visit_leaf(&mut self, cost: f64) {
        if cost > self.running + self.tolerance {
            return;
        }
        self.running = self.running.min(cost);
        // recompute in object-pair order so equal trees always get equal costs
        for (p, &obj) in self.assign.iter().enumerate() {
            self.position_of[obj] = p;
        }
        let n = self.n;
        let mut canonical = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                canonical += self.coef[self.position_of[a] * n + self.position_of[b]] * self.dist.get(a, b);
            }
        }
        if let Some(best) = &self.best {
            if canonical > best.cost {
                return;
            }
        }
        let tree = self
            .shape
            .to_labeled_tree(&self.assign, self.dist.shared_labels().clone())
            .expect("assignment of a valid shape");
        let newick = to_newick(&tree);
        let better = match &self.best {
            None => true,
            Some(best) => compare_candidates((canonical, &newick), (best.cost, &best.newick)).is_lt(),
        };
        if better {
            self.best = Some(Incumbent {
                cost: canonical,
                newick,
                shape: self.shape_index,
                assignment: self.assign.clone(),
            });
        }
    }
}

fn check_ceiling(n: usize, max_n: usize) -> Result<()> {
    if n > max_n {
        return Err(Error::Resource(format!(
            "exact search is capped at n = {max_n}, got {n}"
        )));
    }
    Ok(())
}

pub fn solve_exact(dist: &DistanceMatrix, config: &ExactConfig) -> Result<SolverResult> {
    solve_exact_with_progress(dist, config, &|_| {})
}

/// [`solve_exact`] with a callback fired from worker threads as shapes
/// complete.
pub fn solve_exact_with_progress(
    dist: &DistanceMatrix,
    config: &ExactConfig,
    progress: &(dyn Fn(Progress) + Sync),
) -> Result<SolverResult> {
    let started = Instant::now();
    let n = dist.n();
    check_ceiling(n, config.max_n)?;
    let shapes = generate_shapes(
        n,
        &ShapeConfig {
            max_n: n.max(config.max_n),
        },
    )?;

    let prepared: Vec<(Vec<f64>, Vec<Option<usize>>)> = shapes
        .iter()
        .map(|shape| {
            let identity: Vec<usize> = (0..n).collect();
            let tree = shape
                .to_labeled_tree(&identity, dist.shared_labels().clone())
                .expect("identity assignment");
            let coef = coefficient_matrix(&tree)
                .values()
                .iter()
                .map(|&c| c as f64)
                .collect();
            (coef, cherry_partners(shape))
        })
        .collect();

    let blocks: Vec<(usize, usize)> = (0..shapes.len())
        .flat_map(|s| (0..n).map(move |o| (s, o)))
        .collect();
    let remaining: Vec<AtomicUsize> = shapes.iter().map(|_| AtomicUsize::new(n)).collect();
    let completed = AtomicUsize::new(0);
    let evaluated_total = AtomicU64::new(0);
    let tolerance = cost_tolerance(n);

    let outcomes: Vec<(u64, Option<Incumbent>)> = blocks
        .par_iter()
        .map(|&(s, first)| {
            let (coef, partner) = &prepared[s];
            let mut search = BlockSearch {
                n,
                coef,
                dist,
                partner,
                pruning: config.pruning,
                tolerance,
                shape_index: s,
                shape: &shapes[s],
                assign: vec![0; n],
                used: vec![false; n],
                position_of: vec![0; n],
                evaluated: 0,
                running: f64::INFINITY,
                best: None,
            };
            search.assign[0] = first;
            search.used[first] = true;
            search.dfs(1, 0.0);
            let total = evaluated_total.fetch_add(search.evaluated, Ordering::Relaxed) + search.evaluated;
            if remaining[s].fetch_sub(1, Ordering::AcqRel) == 1 {
                let done = completed.fetch_add(1, Ordering::AcqRel) + 1;
                progress(Progress {
                    shapes_total: shapes.len(),
                    shapes_completed: done,
                    assignments_evaluated: total,
                    elapsed: started.elapsed(),
                });
            }
            (search.evaluated, search.best)
        })
        .collect();

    let assignments_evaluated = outcomes.iter().map(|o| o.0).sum();
    let best = outcomes
        .into_iter()
        .filter_map(|o| o.1)
        .min_by(|a, b| compare_candidates((a.cost, &a.newick), (b.cost, &b.newick)))
        .expect("at least one assignment");
    let best_tree = shapes[best.shape].to_labeled_tree(&best.assignment, dist.shared_labels().clone())?;
    let best_cost = tree_cost(&best_tree, dist)?;
    debug_assert_eq!(best_cost.to_bits(), best.cost.to_bits());
    let bounds = cost_bounds(dist);
    Ok(SolverResult {
        normalized_score: normalized_score(best_cost, bounds)?,
        best_tree,
        best_cost,
        bounds,
        shapes_evaluated: shapes.len() as u64,
        assignments_evaluated,
        distinct_labeled_trees: u64::try_from(double_factorial(2 * n as u64 - 5)).unwrap_or(u64::MAX),
        elapsed: started.elapsed(),
        trajectories: Vec::new(),
    })
}

/// Distinct labeled trees produced by enumerating every shape and every
/// (cherry-pruned) assignment, deduplicated by their Newick form.
pub fn count_labeled_trees(n: usize, config: &ExactConfig) -> Result<u64> {
    if n < 4 {
        return Err(Error::argument(format!("need n >= 4, got {n}")));
    }
    check_ceiling(n, config.max_n)?;
    let labels: Arc<[String]> = (0..n).map(|i| format!("o{i:02}")).collect::<Vec<_>>().into();
    let mut seen = HashSet::new();
    for shape in generate_shapes(
        n,
        &ShapeConfig {
            max_n: n.max(config.max_n),
        },
    )? {
        for assignment in enumerate_assignments(&shape, config.pruning) {
            let tree = shape.to_labeled_tree(&assignment, labels.clone())?;
            seen.insert(to_newick(&tree));
        }
    }
    Ok(seen.len() as u64)
}
