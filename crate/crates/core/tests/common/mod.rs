//! Independent oracles shared by the integration tests. None of these call
//! into the code paths they check.

#![allow(dead_code)]

use std::collections::VecDeque;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mqtc::{DistanceMatrix, LabeledTree, TopologyShape};

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i:02}")).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric dissimilarities in `[0, 1)`.
pub fn random_matrix(n: usize, rng: &mut impl Rng) -> DistanceMatrix {
    let mut v = vec![0.0; n * n];
    for a in 0..n {
        for b in a + 1..n {
            let x: f64 = rng.random();
            v[a * n + b] = x;
            v[b * n + a] = x;
        }
    }
    DistanceMatrix::new(names(n), v).unwrap()
}

/// Breadth-first shortest path, written independently of `leaf_path`.
pub fn bfs_path(t: &LabeledTree, x: usize, y: usize) -> Vec<usize> {
    let mut prev = vec![None; t.node_count()];
    let mut queue = VecDeque::from([x]);
    prev[x] = Some(x);
    while let Some(u) = queue.pop_front() {
        for &v in t.neighbors(u) {
            if prev[v].is_none() {
                prev[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![y];
    while *path.last().unwrap() != x {
        path.push(prev[*path.last().unwrap()].unwrap());
    }
    path.reverse();
    path
}

/// Plain adjacency plus leaf counts per internal node.
#[derive(Debug, Clone)]
pub struct RawShape {
    pub adj: Vec<Vec<usize>>,
    pub slots: Vec<u8>,
}

impl RawShape {
    pub fn from_shape(s: &TopologyShape) -> Self {
        RawShape {
            adj: s.internal_adjacency(),
            slots: s.leaf_slots().to_vec(),
        }
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.adj.len())
            .flat_map(|u| self.adj[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }
}

/// Isomorphism by trying every bijection of internal nodes.
pub fn isomorphic_bruteforce(a: &RawShape, b: &RawShape) -> bool {
    let k = a.adj.len();
    if k != b.adj.len() {
        return false;
    }
    let edges = a.edges();
    (0..k).permutations(k).any(|p| {
        (0..k).all(|v| a.slots[v] == b.slots[p[v]]) && edges.iter().all(|&(u, v)| b.has_edge(p[u], p[v]))
    })
}

/// Isomorphism by backtracking over partial bijections, extending along a
/// breadth-first order of `a`.
pub fn isomorphic_backtrack(a: &RawShape, b: &RawShape) -> bool {
    let k = a.adj.len();
    if k != b.adj.len() {
        return false;
    }
    let mut order = vec![0];
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        for &v in &a.adj[order[i]] {
            if !seen[v] {
                seen[v] = true;
                order.push(v);
            }
        }
        i += 1;
    }
    fn extend(
        a: &RawShape,
        b: &RawShape,
        order: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        i: usize,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let v = order[i];
        for w in 0..b.adj.len() {
            if used[w] || a.slots[v] != b.slots[w] || a.adj[v].len() != b.adj[w].len() {
                continue;
            }
            let consistent = order[..i]
                .iter()
                .all(|&u| a.has_edge(u, v) == b.has_edge(map[u], w));
            if consistent {
                map[v] = w;
                used[w] = true;
                if extend(a, b, order, map, used, i + 1) {
                    return true;
                }
                used[w] = false;
            }
        }
        false
    }
    let mut map = vec![usize::MAX; k];
    let mut used = vec![false; k];
    extend(a, b, &order, &mut map, &mut used, 0)
}

/// Every labeled tree on `k` nodes with maximum degree 3, via Prüfer
/// sequences, as raw shapes (leaf count = 3 - degree).
pub fn all_raw_shapes(k: usize) -> Vec<RawShape> {
    assert!(k >= 2);
    if k == 2 {
        return vec![RawShape {
            adj: vec![vec![1], vec![0]],
            slots: vec![2, 2],
        }];
    }
    let mut out = Vec::new();
    let len = k - 2;
    let mut seq = vec![0usize; len];
    loop {
        let mut count = vec![0usize; k];
        for &x in &seq {
            count[x] += 1;
        }
        // degree = count + 1 <= 3
        if count.iter().all(|&c| c <= 2) {
            out.push(decode_pruefer(&seq, k));
        }
        // next sequence in base k
        let mut i = 0;
        loop {
            if i == len {
                return out;
            }
            seq[i] += 1;
            if seq[i] < k {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

fn decode_pruefer(seq: &[usize], k: usize) -> RawShape {
    let mut degree = vec![1usize; k];
    for &x in seq {
        degree[x] += 1;
    }
    let mut adj = vec![Vec::new(); k];
    let link = |u: usize, v: usize, adj: &mut Vec<Vec<usize>>| {
        adj[u].push(v);
        adj[v].push(u);
    };
    for &x in seq {
        let leaf = (0..k).find(|&v| degree[v] == 1).unwrap();
        link(leaf, x, &mut adj);
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..k).filter(|&v| degree[v] == 1).collect();
    link(rest[0], rest[1], &mut adj);
    let slots = adj.iter().map(|nbrs| (3 - nbrs.len()) as u8).collect();
    RawShape { adj, slots }
}

/// Isomorphism classes of shapes with `n` leaves, by exhaustive Prüfer
/// construction and backtracking dedup.
pub fn shape_classes_oracle(n: usize) -> Vec<RawShape> {
    let mut reps: Vec<RawShape> = Vec::new();
    for s in all_raw_shapes(n - 2) {
        if !reps.iter().any(|r| isomorphic_backtrack(r, &s)) {
            reps.push(s);
        }
    }
    reps
}

/// Isomorphism classes of shapes with `n` leaves, grown node by node from a
/// single edge and deduplicated pairwise with [`isomorphic_bruteforce`].
/// Every tree on `k` nodes is a tree on `k - 1` nodes plus one pendant node,
/// so each level is exhaustive.
pub fn shape_classes_by_growth(n: usize) -> Vec<RawShape> {
    let mut level = vec![RawShape {
        adj: vec![vec![1], vec![0]],
        slots: vec![2, 2],
    }];
    for k in 3..=n - 2 {
        let mut next: Vec<RawShape> = Vec::new();
        for rep in &level {
            for v in 0..k - 1 {
                if rep.adj[v].len() == 3 {
                    continue;
                }
                let mut adj = rep.adj.clone();
                adj[v].push(k - 1);
                adj.push(vec![v]);
                let slots = adj.iter().map(|nbrs| (3 - nbrs.len()) as u8).collect();
                let cand = RawShape { adj, slots };
                if !next.iter().any(|r| isomorphic_bruteforce(r, &cand)) {
                    next.push(cand);
                }
            }
        }
        level = next;
    }
    level
}

/// Characteristic polynomial of a tree's adjacency matrix from its matching
/// numbers: `sum_j (-1)^j m_j x^(k - 2j)`. Leading coefficient first.
pub fn charpoly_by_matchings(shape: &RawShape) -> Vec<i64> {
    let k = shape.adj.len();
    let edges = shape.edges();
    let mut matchings = vec![0i64; k / 2 + 1];
    for mask in 0u32..(1 << edges.len()) {
        let mut used = vec![false; k];
        let mut ok = true;
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask & (1 << i) != 0 {
                if used[u] || used[v] {
                    ok = false;
                    break;
                }
                used[u] = true;
                used[v] = true;
            }
        }
        if ok {
            matchings[mask.count_ones() as usize] += 1;
        }
    }
    let mut poly = vec![0i64; k + 1];
    for (j, &m) in matchings.iter().enumerate() {
        poly[2 * j] = if j % 2 == 0 { m } else { -m };
    }
    poly
}

/// The topologies over `subset` whose within-pair paths are node-disjoint,
/// found with breadth-first paths.
pub fn disjoint_topologies(t: &LabeledTree, [a, b, c, d]: [usize; 4]) -> Vec<[[usize; 2]; 2]> {
    let path = |x: usize, y: usize| bfs_path(t, t.leaf_of(x), t.leaf_of(y));
    [[[a, b], [c, d]], [[a, c], [b, d]], [[a, d], [b, c]]]
        .into_iter()
        .filter(|[p, q]| {
            let left = path(p[0], p[1]);
            path(q[0], q[1]).iter().all(|v| !left.contains(v))
        })
        .collect()
}

/// Tree cost summed quartet by quartet over the breadth-first oracle.
pub fn cost_by_quartets(t: &LabeledTree, d: &DistanceMatrix) -> f64 {
    let n = t.n();
    let mut total = 0.0;
    for subset in (0..n).combinations(4) {
        let found = disjoint_topologies(t, [subset[0], subset[1], subset[2], subset[3]]);
        let [p, q] = found[0];
        total += d.get(p[0], p[1]) + d.get(q[0], q[1]);
    }
    total
}

/// Distances proportional to path lengths in `t`, divided by a power of two
/// so every entry and every sum of them is exact. Every quartet the tree
/// embeds is then the strictly cheapest of its three.
pub fn additive_matrix(t: &LabeledTree) -> DistanceMatrix {
    let n = t.n();
    let hops = |a: usize, b: usize| bfs_path(t, t.leaf_of(a), t.leaf_of(b)).len() - 1;
    let longest = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| hops(a, b))
        .max()
        .unwrap();
    let scale = longest.next_power_of_two() as f64;
    DistanceMatrix::from_fn(t.labels().to_vec(), |a, b| hops(a, b) as f64 / scale).unwrap()
}
