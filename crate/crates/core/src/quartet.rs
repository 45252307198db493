//! Quartet topologies, their costs, and the cost of a whole tree.
//!
//! The cost of a tree is the sum, over every 4-subset of objects, of the cost
//! of the one quartet topology the tree embeds. Grouping those terms by pair
//! gives `cost(t) = sum_{a<b} coef(a,b) * D(a,b)`, where `coef(a,b)` counts
//! the embedded quartets that pair `a` with `b`.

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::tree::LabeledTree;

/// `n choose k` for the small arguments used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Absolute tolerance used when comparing tree costs over `n` objects.
pub fn cost_tolerance(n: usize) -> f64 {
    1e-12 * (binomial(n as u64, 4).max(1) as f64)
}

/// A simple quartet topology `ab|cd`, stored normalized so that equal
/// topologies compare equal however they were written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quartet {
    pairs: [[usize; 2]; 2],
}

impl Quartet {
    pub fn new(a: usize, b: usize, c: usize, d: usize) -> Result<Self> {
        let all = [a, b, c, d];
        for i in 0..4 {
            for j in i + 1..4 {
                if all[i] == all[j] {
                    return Err(Error::argument(format!(
                        "quartet needs four distinct objects, got {all:?}"
                    )));
                }
            }
        }
        let p = [[a.min(b), a.max(b)], [c.min(d), c.max(d)]];
        let pairs = if p[0] <= p[1] { p } else { [p[1], p[0]] };
        Ok(Quartet { pairs })
    }

    /// The three topologies over a 4-subset: `ab|cd`, `ac|bd`, `ad|bc`.
    pub fn candidates([a, b, c, d]: [usize; 4]) -> Result<[Quartet; 3]> {
        Ok([
            Quartet::new(a, b, c, d)?,
            Quartet::new(a, c, b, d)?,
            Quartet::new(a, d, b, c)?,
        ])
    }

    pub fn pairs(&self) -> [[usize; 2]; 2] {
        self.pairs
    }
}

impl std::fmt::Display for Quartet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [[a, b], [c, d]] = self.pairs;
        write!(f, "{a}{b}|{c}{d}")
    }
}

/// `D(a,b) + D(c,d)` for `ab|cd`.
pub fn quartet_cost(q: &Quartet, dist: &DistanceMatrix) -> Result<f64> {
    let [[a, b], [c, d]] = q.pairs;
    let n = dist.n();
    if [a, b, c, d].iter().any(|&x| x >= n) {
        return Err(Error::argument(format!("quartet {q} out of range for n={n}")));
    }
    Ok(dist.get(a, b) + dist.get(c, d))
}

/// The topology of `subset` embedded in `tree`: the one whose two
/// within-pair leaf paths share no node.
pub fn consistent_topology(tree: &LabeledTree, subset: [usize; 4]) -> Result<Quartet> {
    let candidates = Quartet::candidates(subset)?;
    let mut found = None;
    for q in candidates {
        let [[a, b], [c, d]] = q.pairs;
        let left = tree.object_path(a, b)?;
        let right = tree.object_path(c, d)?;
        if left.iter().all(|v| !right.contains(v)) {
            debug_assert!(found.is_none(), "two disjoint topologies for {subset:?}");
            found = Some(q);
        }
    }
    found.ok_or_else(|| Error::argument(format!("no consistent topology for {subset:?}")))
}

/// The `n x n` Coefficients block: `coef(a,b)` embedded quartets pair `a`
/// with `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMatrix {
    n: usize,
    values: Vec<u64>,
}

impl CoefficientMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.values[a * self.n + b]
    }

    /// Row-major entries.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `sum_{a<b} coef(a,b)`; equals `2 * C(n,4)` for every tree.
    pub fn pair_sum(&self) -> u64 {
        (0..self.n)
            .flat_map(|a| (a + 1..self.n).map(move |b| (a, b)))
            .map(|(a, b)| self.get(a, b))
            .sum()
    }

    /// `sum_{a<b} coef(a,b) * D(a,b)`, accumulated in row-major pair order.
    pub fn weighted_sum(&self, dist: &DistanceMatrix) -> f64 {
        let mut total = 0.0;
        for a in 0..self.n {
            for b in a + 1..self.n {
                total += self.get(a, b) as f64 * dist.get(a, b);
            }
        }
        total
    }
}

/// Number of leaves on the `to` side of every directed edge `from -> to`,
/// indexed as `side[from][slot]` with `slot` the position of `to` in the
/// neighbor list of `from`.
fn directed_leaf_counts(tree: &LabeledTree) -> Vec<[usize; 3]> {
    let n = tree.n();
    let nodes = tree.node_count();
    let adj = tree.adjacency();
    let mut parent = vec![usize::MAX; nodes];
    let mut order = Vec::with_capacity(nodes);
    let mut stack = vec![0usize];
    parent[0] = 0;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &v in &adj[u] {
            if parent[v] == usize::MAX {
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    let mut below = vec![0usize; nodes];
    for &u in order.iter().rev() {
        if tree.is_leaf(u) {
            below[u] = 1;
        }
        if u != 0 {
            below[parent[u]] += below[u];
        }
    }
    let mut side = vec![[0usize; 3]; nodes];
    for u in 0..nodes {
        for (slot, &v) in adj[u].iter().enumerate() {
            side[u][slot] = if parent[v] == u && v != 0 {
                below[v]
            } else {
                n - below[u]
            };
        }
    }
    side
}

/// Coefficients by path decomposition: for each pair `(a,b)`, sum
/// `C(k, 2)` over the subtrees hanging off the internal nodes of the `a-b`
/// path, `k` being the number of leaves in each. Runs in `O(n^2)`.
pub fn coefficient_matrix(tree: &LabeledTree) -> CoefficientMatrix {
    let n = tree.n();
    let adj = tree.adjacency();
    let side = directed_leaf_counts(tree);
    let pairs_in = |k: usize| (k * k.saturating_sub(1) / 2) as u64;
    let mut values = vec![0u64; n * n];
    let mut stack = Vec::with_capacity(tree.node_count());
    for a in 0..n {
        let start = tree.leaf_of(a);
        stack.clear();
        stack.push((adj[start][0], start, 0u64));
        while let Some((v, from, acc)) = stack.pop() {
            if let Some(b) = tree.object_of(v) {
                values[a * n + b] = acc;
                continue;
            }
            let nbrs = &adj[v];
            let onward: Vec<usize> = (0..3).filter(|&s| nbrs[s] != from).collect();
            let (s1, s2) = (onward[0], onward[1]);
            stack.push((nbrs[s1], v, acc + pairs_in(side[v][s2])));
            stack.push((nbrs[s2], v, acc + pairs_in(side[v][s1])));
        }
    }
    CoefficientMatrix { n, values }
}

/// Coefficients by tallying the consistent topology of every 4-subset.
/// `O(n^5)`; the independent check on [`coefficient_matrix`].
pub fn coefficient_matrix_by_quartets(tree: &LabeledTree) -> CoefficientMatrix {
    let n = tree.n();
    let mut values = vec![0u64; n * n];
    for_each_subset(n, |s| {
        let q = consistent_topology(tree, s).expect("valid subset");
        for [x, y] in q.pairs {
            values[x * n + y] += 1;
            values[y * n + x] += 1;
        }
    });
    CoefficientMatrix { n, values }
}

pub(crate) fn for_each_subset(n: usize, mut f: impl FnMut([usize; 4])) {
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    f([a, b, c, d]);
                }
            }
        }
    }
}

fn check_labels_match(tree: &LabeledTree, dist: &DistanceMatrix) -> Result<()> {
    if tree.labels() != dist.labels() {
        return Err(Error::argument(
            "tree labels do not match the distance matrix labels",
        ));
    }
    Ok(())
}

/// Tree cost as half the Frobenius product of the coefficient block with `D`.
pub fn tree_cost(tree: &LabeledTree, dist: &DistanceMatrix) -> Result<f64> {
    check_labels_match(tree, dist)?;
    Ok(coefficient_matrix(tree).weighted_sum(dist))
}

/// Tree cost straight from the definition: the sum over all `C(n,4)`
/// subsets of the cost of the embedded topology.
pub fn tree_cost_bruteforce(tree: &LabeledTree, dist: &DistanceMatrix) -> Result<f64> {
    check_labels_match(tree, dist)?;
    let n = tree.n();
    // all leaf-to-leaf paths once, as node bitsets
    let words = tree.node_count().div_ceil(64);
    let mut paths = vec![vec![0u64; words]; n * n];
    for a in 0..n {
        for b in a + 1..n {
            let mut bits = vec![0u64; words];
            for v in tree.object_path(a, b)? {
                bits[v / 64] |= 1 << (v % 64);
            }
            paths[a * n + b] = bits.clone();
            paths[b * n + a] = bits;
        }
    }
    let disjoint = |a: usize, b: usize, c: usize, d: usize| {
        paths[a * n + b]
            .iter()
            .zip(&paths[c * n + d])
            .all(|(x, y)| x & y == 0)
    };
    let mut total = 0.0;
    let mut failure = None;
    for_each_subset(n, |[a, b, c, d]| {
        let options = [(a, b, c, d), (a, c, b, d), (a, d, b, c)];
        let hits: Vec<_> = options
            .iter()
            .filter(|&&(w, x, y, z)| disjoint(w, x, y, z))
            .collect();
        match hits.as_slice() {
            [&(w, x, y, z)] => total += dist.get(w, x) + dist.get(y, z),
            _ => failure = Some([a, b, c, d]),
        }
    });
    match failure {
        Some(s) => Err(Error::argument(format!(
            "subset {s:?} has no unique consistent topology"
        ))),
        None => Ok(total),
    }
}

/// Lower and upper bounds on any tree cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBounds {
    /// Sum over 4-subsets of the cheapest of the three topologies.
    pub min: f64,
    /// Sum over 4-subsets of the dearest of the three topologies.
    pub max: f64,
}

pub fn cost_bounds(dist: &DistanceMatrix) -> CostBounds {
    let (mut min, mut max) = (0.0, 0.0);
    for_each_subset(dist.n(), |[a, b, c, d]| {
        let costs = [
            dist.get(a, b) + dist.get(c, d),
            dist.get(a, c) + dist.get(b, d),
            dist.get(a, d) + dist.get(b, c),
        ];
        min += costs.iter().copied().fold(f64::INFINITY, f64::min);
        max += costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    });
    CostBounds { min, max }
}

/// Slack allowed when checking a cost against its bounds.
pub const SCORE_SLACK: f64 = 1e-9;

/// `(M - cost) / (M - m)`, clamped into `[0, 1]`; 1 when `M == m`.
pub fn normalized_score(cost: f64, bounds: CostBounds) -> Result<f64> {
    let CostBounds { min, max } = bounds;
    if cost < min - SCORE_SLACK || cost > max + SCORE_SLACK {
        return Err(Error::argument(format!(
            "cost {cost} outside bounds [{min}, {max}]"
        )));
    }
    if max - min <= 0.0 {
        return Ok(1.0);
    }
    Ok(((max - cost) / (max - min)).clamp(0.0, 1.0))
}
