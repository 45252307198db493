//! Randomized hill climbing with restarts.
//!
//! Each restart starts from a uniformly random tree and moves to the first
//! strictly cheaper neighbor in a fixed scan order until none exists or the
//! step budget runs out. Restart `r` draws from its own ChaCha8 stream
//! (seeded with the run seed, stream number `r`), so results do not depend
//! on how restarts are scheduled across threads.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use web_time::Instant;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::newick::to_newick;
use crate::quartet::{cost_bounds, normalized_score, tree_cost};
use crate::solution::{compare_candidates, SolverResult};
use crate::tree::{GraphBuilder, LabeledTree, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    /// Exchange two leaves that are not a cherry.
    LeafSwap,
    /// Prune a single leaf and regraft it on another edge.
    SubtreeMove,
    Both,
}

impl std::str::FromStr for Neighborhood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leaf-swap" => Ok(Neighborhood::LeafSwap),
            "subtree-move" => Ok(Neighborhood::SubtreeMove),
            "both" => Ok(Neighborhood::Both),
            other => Err(Error::argument(format!("unknown neighborhood {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_steps_per_restart: usize,
    pub neighborhood: Neighborhood,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 1,
            restarts: 20,
            max_steps_per_restart: 500,
            neighborhood: Neighborhood::Both,
        }
    }
}

/// The RNG for restart `restart` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, restart: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    rng
}

/// A uniformly random labeled tree: objects are inserted one by one, each on
/// an edge chosen uniformly among the current ones.
pub fn random_tree<R: Rng + ?Sized>(labels: &[String], rng: &mut R) -> Result<LabeledTree> {
    let n = labels.len();
    if n < 4 {
        return Err(Error::Size(format!("need at least 4 objects, got {n}")));
    }
    let mut g = GraphBuilder::star(0, 1, 2);
    for object in 3..n {
        let edge = rng.random_range(0..g.edges.len());
        g.insert_leaf(edge, object);
    }
    Ok(g.finish(labels.to_vec().into()))
}

fn swapped(tree: &LabeledTree, a: usize, b: usize) -> LabeledTree {
    let (la, lb) = (tree.leaf_of(a), tree.leaf_of(b));
    let (pa, pb) = (tree.attachment(a), tree.attachment(b));
    let mut adj = tree.adjacency().to_vec();
    for x in adj[pa].iter_mut() {
        if *x == la {
            *x = lb;
        }
    }
    for x in adj[pb].iter_mut() {
        if *x == lb {
            *x = la;
        }
    }
    adj[la] = vec![pb];
    adj[lb] = vec![pa];
    LabeledTree::from_adjacency(tree.shared_labels().clone(), adj)
}

/// Edges of the tree left after pruning `object`, in sorted order, skipping
/// the edge that would put it back where it was. Also returns the pruned
/// adjacency.
fn regraft_sites(tree: &LabeledTree, object: usize) -> (Vec<Vec<NodeId>>, Vec<(NodeId, NodeId)>) {
    let leaf = tree.leaf_of(object);
    let p = tree.attachment(object);
    let others: Vec<NodeId> = tree.neighbors(p).iter().copied().filter(|&v| v != leaf).collect();
    let (u, v) = (others[0], others[1]);
    let mut adj = tree.adjacency().to_vec();
    adj[leaf].clear();
    adj[p].clear();
    for (x, y) in [(u, v), (v, u)] {
        for z in adj[x].iter_mut() {
            if *z == p {
                *z = y;
            }
        }
    }
    let mut edges: Vec<(NodeId, NodeId)> = adj
        .iter()
        .enumerate()
        .flat_map(|(a, nbrs)| nbrs.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
        .filter(|&e| e != (u.min(v), u.max(v)))
        .collect();
    edges.sort_unstable();
    (adj, edges)
}

fn regrafted(
    tree: &LabeledTree,
    object: usize,
    pruned: &[Vec<NodeId>],
    (s, t): (NodeId, NodeId),
) -> LabeledTree {
    let leaf = tree.leaf_of(object);
    let p = tree.attachment(object);
    let mut adj = pruned.to_vec();
    for (x, y) in [(s, t), (t, s)] {
        for z in adj[x].iter_mut() {
            if *z == y {
                *z = p;
            }
        }
    }
    adj[p] = vec![s, t, leaf];
    adj[leaf] = vec![p];
    LabeledTree::from_adjacency(tree.shared_labels().clone(), adj)
}

/// Neighbors of `tree` in scan order: leaf swaps by object pair, then leaf
/// regrafts by object and target edge. Yields
/// `C(n,2) - cherries` swaps and `n (2n - 6)` regrafts; different moves may
/// reach the same tree.
pub fn neighbors(tree: &LabeledTree, neighborhood: Neighborhood) -> impl Iterator<Item = LabeledTree> + '_ {
    let n = tree.n();
    let swaps = matches!(neighborhood, Neighborhood::LeafSwap | Neighborhood::Both);
    let moves = matches!(neighborhood, Neighborhood::SubtreeMove | Neighborhood::Both);
    let swap_iter = (0..n)
        .flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
        .filter(move |_| swaps)
        .filter(|&(a, b)| !tree.is_cherry(a, b))
        .map(|(a, b)| swapped(tree, a, b));
    let move_iter = (0..n).filter(move |_| moves).flat_map(move |object| {
        let (pruned, sites) = regraft_sites(tree, object);
        sites
            .into_iter()
            .map(move |site| regrafted(tree, object, &pruned, site))
    });
    swap_iter.chain(move_iter)
}

struct RestartOutcome {
    tree: LabeledTree,
    cost: f64,
    newick: String,
    trajectory: Vec<f64>,
    visited: Vec<String>,
    evaluated: u64,
}

fn climb(dist: &DistanceMatrix, config: &SearchConfig, restart: usize) -> Result<RestartOutcome> {
    let mut rng = restart_rng(config.seed, restart as u64);
    let mut tree = random_tree(dist.labels(), &mut rng)?;
    let mut cost = tree_cost(&tree, dist)?;
    let mut trajectory = vec![cost];
    let mut visited = vec![to_newick(&tree)];
    let mut evaluated = 1u64;
    for _ in 0..config.max_steps_per_restart {
        let mut improved = None;
        for candidate in neighbors(&tree, config.neighborhood) {
            evaluated += 1;
            let c = tree_cost(&candidate, dist)?;
            if c < cost {
                improved = Some((candidate, c));
                break;
            }
        }
        match improved {
            Some((next, c)) => {
                tree = next;
                cost = c;
                trajectory.push(c);
                visited.push(to_newick(&tree));
            }
            None => break,
        }
    }
    let newick = to_newick(&tree);
    Ok(RestartOutcome {
        tree,
        cost,
        newick,
        trajectory,
        visited,
        evaluated,
    })
}

pub fn solve_hill_climbing(dist: &DistanceMatrix, config: &SearchConfig) -> Result<SolverResult> {
    if config.restarts == 0 {
        return Err(Error::argument("restarts must be at least 1"));
    }
    let started = Instant::now();
    let outcomes = (0..config.restarts)
        .into_par_iter()
        .map(|r| climb(dist, config, r))
        .collect::<Result<Vec<_>>>()?;
    let evaluated = outcomes.iter().map(|o| o.evaluated).sum();
    let distinct: HashSet<&str> = outcomes
        .iter()
        .flat_map(|o| o.visited.iter().map(String::as_str))
        .collect();
    let distinct = distinct.len() as u64;
    let trajectories: Vec<Vec<f64>> = outcomes.iter().map(|o| o.trajectory.clone()).collect();
    let best = outcomes
        .into_iter()
        .min_by(|a, b| compare_candidates((a.cost, &a.newick), (b.cost, &b.newick)))
        .expect("at least one restart");
    let bounds = cost_bounds(dist);
    Ok(SolverResult {
        normalized_score: normalized_score(best.cost, bounds)?,
        best_tree: best.tree,
        best_cost: best.cost,
        bounds,
        shapes_evaluated: 0,
        assignments_evaluated: evaluated,
        distinct_labeled_trees: distinct,
        elapsed: started.elapsed(),
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn labels(names: &str) -> Vec<String> {
        names.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn random_trees_are_uniform_at_four_leaves() {
        let names = labels("abcd");
        let mut rng = restart_rng(7, 0);
        let mut counts: HashMap<String, usize> = HashMap::new();
        for _ in 0..3000 {
            let t = random_tree(&names, &mut rng).unwrap();
            assert_eq!(t.validate(), Ok(()));
            *counts.entry(to_newick(&t)).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        for (_, c) in counts {
            assert!((c as f64 / 3000.0 - 1.0 / 3.0).abs() < 0.05);
        }
    }

    #[test]
    fn fixed_seed_reproduces() {
        let names = labels("abcdefgh");
        let a = random_tree(&names, &mut restart_rng(42, 3)).unwrap();
        let b = random_tree(&names, &mut restart_rng(42, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn four_leaf_swaps_reach_the_other_trees() {
        let t = LabeledTree::new(labels("abcd"), &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)]).unwrap();
        let reached: HashSet<String> = neighbors(&t, Neighborhood::LeafSwap)
            .map(|x| to_newick(&x))
            .collect();
        let expected: HashSet<String> = ["(a,(b,d),c);", "(a,(b,c),d);"].map(String::from).into();
        assert_eq!(reached, expected);
    }

    #[test]
    fn neighbor_counts_at_six() {
        let names = labels("abcdef");
        for t in crate::tree::enumerate_labeled_trees(&names).unwrap() {
            let cherries = t.cherries().len();
            let all: Vec<_> = neighbors(&t, Neighborhood::Both).collect();
            assert_eq!(all.len(), 15 - cherries + 6 * 6);
            let own = to_newick(&t);
            for x in &all {
                assert_eq!(x.validate(), Ok(()));
                assert_ne!(to_newick(x), own);
            }
        }
    }

    #[test]
    fn zero_steps_returns_the_start_tree() {
        let names = labels("abcdefg");
        let d = DistanceMatrix::from_fn(names.clone(), |a, b| {
            if a == b {
                0.0
            } else {
                ((a * 7 + b * 7) % 10) as f64 / 10.0
            }
        })
        .unwrap();
        let cfg = SearchConfig {
            seed: 9,
            restarts: 1,
            max_steps_per_restart: 0,
            neighborhood: Neighborhood::Both,
        };
        let r = solve_hill_climbing(&d, &cfg).unwrap();
        let start = random_tree(&names, &mut restart_rng(9, 0)).unwrap();
        assert_eq!(r.best_tree, start);
        assert_eq!(r.trajectories, vec![vec![tree_cost(&start, &d).unwrap()]]);
    }

    #[test]
    fn rejects_zero_restarts() {
        let names = labels("abcd");
        let d = DistanceMatrix::from_fn(names, |a, b| if a == b { 0.0 } else { 0.5 }).unwrap();
        let cfg = SearchConfig {
            restarts: 0,
            ..SearchConfig::default()
        };
        assert!(solve_hill_climbing(&d, &cfg).is_err());
    }
}
