//! Full unrooted binary trees with labeled leaves.
//!
//! A tree over `n` objects has `2n - 2` nodes. Node ids are 0-based with the
//! internal nodes first: ids `0..n-2` are internal, ids `n-2..2n-2` are
//! leaves, and leaf `n - 2 + k` always carries object `k`. Changing which
//! object sits where therefore changes the edges, never the leaf ids.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Characters that cannot appear in an object label (Newick metacharacters).
pub const FORBIDDEN_LABEL_CHARS: &[char] = &['(', ')', ',', ';', ':'];

/// The first structural invariant a candidate tree breaks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeViolation {
    #[error("a tree needs at least 4 leaves, got {0}")]
    TooFewLeaves(usize),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(NodeId, NodeId, usize),
    #[error("self loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("leaf {label} (node {node}) has degree {degree}, expected 1")]
    LeafDegree {
        node: NodeId,
        label: String,
        degree: usize,
    },
    #[error("internal node {node} has degree {degree}, expected 3")]
    InternalDegree { node: NodeId, degree: usize },
    #[error("expected {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("internal nodes are disconnected")]
    InternalDisconnected,
    #[error("tree is not connected")]
    Disconnected,
    #[error("leaf {0} is not attached to any internal node")]
    DanglingLeaf(String),
    #[error("invalid leaf label {0:?}")]
    InvalidLabel(String),
    #[error("duplicate leaf label {0:?}")]
    DuplicateLabel(String),
}

pub fn check_label(label: &str) -> Result<(), TreeViolation> {
    if label.is_empty() || label.contains(FORBIDDEN_LABEL_CHARS) {
        return Err(TreeViolation::InvalidLabel(label.to_string()));
    }
    Ok(())
}

pub(crate) fn check_labels(labels: &[String]) -> Result<(), TreeViolation> {
    let mut seen = HashSet::with_capacity(labels.len());
    for label in labels {
        check_label(label)?;
        if !seen.insert(label.as_str()) {
            return Err(TreeViolation::DuplicateLabel(label.clone()));
        }
    }
    Ok(())
}

/// Checks every invariant of a full unrooted binary tree and reports the
/// first one that fails.
///
/// Checks run in this order: leaf count, edge endpoints, leaf degrees,
/// internal degrees, edge count, connectivity, label bijection.
pub fn validate_tree(labels: &[String], edges: &[(NodeId, NodeId)]) -> Result<(), TreeViolation> {
    let n = labels.len();
    if n < 4 {
        return Err(TreeViolation::TooFewLeaves(n));
    }
    let nodes = 2 * n - 2;
    let mut seen = HashSet::with_capacity(edges.len());
    let mut adj = vec![Vec::new(); nodes];
    for &(u, v) in edges {
        if u >= nodes || v >= nodes {
            return Err(TreeViolation::NodeOutOfRange(u, v, nodes));
        }
        if u == v {
            return Err(TreeViolation::SelfLoop(u));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(TreeViolation::DuplicateEdge(u, v));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    for (k, label) in labels.iter().enumerate() {
        let node = n - 2 + k;
        if adj[node].len() != 1 {
            return Err(TreeViolation::LeafDegree {
                node,
                label: label.clone(),
                degree: adj[node].len(),
            });
        }
    }
    for (node, nbrs) in adj.iter().enumerate().take(n - 2) {
        if nbrs.len() != 3 {
            return Err(TreeViolation::InternalDegree {
                node,
                degree: nbrs.len(),
            });
        }
    }
    if edges.len() != 2 * n - 3 {
        return Err(TreeViolation::EdgeCount {
            expected: 2 * n - 3,
            found: edges.len(),
        });
    }
    if bfs_order(&adj, 0).len() != nodes {
        return Err(TreeViolation::Disconnected);
    }
    check_labels(labels)
}

fn bfs_order(adj: &[Vec<NodeId>], start: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; adj.len()];
    let mut order = Vec::with_capacity(adj.len());
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    order
}

/// A full unrooted binary tree whose leaves carry the `n` objects.
///
/// Always valid: every constructor runs [`validate_tree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    labels: Arc<[String]>,
    adj: Vec<Vec<NodeId>>,
}

impl LabeledTree {
    pub fn new(labels: Vec<String>, edges: &[(NodeId, NodeId)]) -> Result<Self, TreeViolation> {
        Self::with_shared_labels(labels.into(), edges)
    }

    pub fn with_shared_labels(
        labels: Arc<[String]>,
        edges: &[(NodeId, NodeId)],
    ) -> Result<Self, TreeViolation> {
        validate_tree(&labels, edges)?;
        let mut adj = vec![Vec::with_capacity(3); 2 * labels.len() - 2];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(LabeledTree { labels, adj })
    }

    /// Builds a tree from adjacency lists already in the node-id convention.
    /// Only used by moves that preserve validity by construction.
    pub(crate) fn from_adjacency(labels: Arc<[String]>, mut adj: Vec<Vec<NodeId>>) -> Self {
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        let tree = LabeledTree { labels, adj };
        debug_assert_eq!(tree.validate(), Ok(()));
        tree
    }

    /// Builds a tree from an arbitrary graph whose nodes are tagged with
    /// `Some(object)` for leaves and `None` for internal nodes, renumbering
    /// internal nodes in order of first appearance.
    pub(crate) fn from_graph(
        labels: Arc<[String]>,
        adj: &[Vec<usize>],
        kind: &[Option<usize>],
    ) -> Result<Self, TreeViolation> {
        let n = labels.len();
        if n < 4 {
            return Err(TreeViolation::TooFewLeaves(n));
        }
        let mut id = vec![usize::MAX; adj.len()];
        let mut next_internal = 0;
        for (node, k) in kind.iter().enumerate() {
            match *k {
                Some(object) if object < n => id[node] = n - 2 + object,
                Some(object) => {
                    return Err(TreeViolation::NodeOutOfRange(node, object, n));
                }
                None => {
                    id[node] = next_internal;
                    next_internal += 1;
                }
            }
        }
        if next_internal != n - 2 {
            return Err(TreeViolation::EdgeCount {
                expected: 2 * n - 3,
                found: adj.iter().map(Vec::len).sum::<usize>() / 2,
            });
        }
        let edges: Vec<_> = adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .map(|(u, v)| (id[u], id[v]))
            .collect();
        Self::with_shared_labels(labels, &edges)
    }

    pub fn validate(&self) -> Result<(), TreeViolation> {
        validate_tree(&self.labels, &self.edges())
    }

    /// Number of leaves (objects).
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub(crate) fn shared_labels(&self) -> &Arc<[String]> {
        &self.labels
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        node >= self.n() - 2 && node < self.node_count()
    }

    pub fn leaf_of(&self, object: usize) -> NodeId {
        self.n() - 2 + object
    }

    /// The object carried by `node`, or `None` for internal nodes.
    pub fn object_of(&self, node: NodeId) -> Option<usize> {
        self.is_leaf(node).then(|| node + 2 - self.n())
    }

    pub fn label_of(&self, node: NodeId) -> Option<&str> {
        self.object_of(node).map(|k| self.labels[k].as_str())
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adj[node]
    }

    pub(crate) fn adjacency(&self) -> &[Vec<NodeId>] {
        &self.adj
    }

    /// The internal node a leaf hangs from.
    pub fn attachment(&self, object: usize) -> NodeId {
        self.adj[self.leaf_of(object)][0]
    }

    /// Sorted edge list with `u < v` in every pair.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut edges: Vec<_> = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Whether objects `a` and `b` hang from the same internal node.
    pub fn is_cherry(&self, a: usize, b: usize) -> bool {
        a != b && self.attachment(a) == self.attachment(b)
    }

    /// All cherries as `(a, b)` object pairs with `a < b`.
    pub fn cherries(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for v in 0..n - 2 {
            let leaves: Vec<_> = self.adj[v].iter().filter_map(|&u| self.object_of(u)).collect();
            if leaves.len() == 2 {
                out.push((leaves[0].min(leaves[1]), leaves[0].max(leaves[1])));
            }
        }
        out.sort_unstable();
        out
    }

    /// The unique simple path between two leaves, endpoints included.
    pub fn leaf_path(&self, x: NodeId, y: NodeId) -> Result<Vec<NodeId>> {
        if !self.is_leaf(x) || !self.is_leaf(y) {
            return Err(Error::argument(format!(
                "leaf_path needs two leaves, got nodes {x} and {y}"
            )));
        }
        if x == y {
            return Err(Error::argument("leaf_path endpoints must differ"));
        }
        let mut parent = vec![usize::MAX; self.node_count()];
        parent[x] = x;
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            if u == y {
                break;
            }
            for &v in &self.adj[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut path = vec![y];
        let mut cur = y;
        while cur != x {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    /// Path between two objects, by object index.
    pub fn object_path(&self, a: usize, b: usize) -> Result<Vec<NodeId>> {
        if a >= self.n() || b >= self.n() {
            return Err(Error::argument(format!(
                "object index out of range for n={}",
                self.n()
            )));
        }
        self.leaf_path(self.leaf_of(a), self.leaf_of(b))
    }

    /// The same tree with objects renamed by `perm`: object `k` of `self`
    /// becomes object `perm[k]` of the result, whose labels are `labels`.
    pub fn relabeled(&self, perm: &[usize], labels: Arc<[String]>) -> Result<Self> {
        let n = self.n();
        if perm.len() != n || labels.len() != n {
            return Err(Error::argument("permutation length does not match tree size"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::argument("relabeling is not a permutation"));
            }
        }
        let map = |u: NodeId| match self.object_of(u) {
            Some(k) => n - 2 + perm[k],
            None => u,
        };
        let edges: Vec<_> = self.edges().into_iter().map(|(u, v)| (map(u), map(v))).collect();
        Ok(Self::with_shared_labels(labels, &edges)?)
    }

    /// Reorders objects so that object indices follow `order` (a list of
    /// labels). Fails when `order` is not a permutation of this tree's labels.
    pub fn with_label_order(&self, order: &[String]) -> Result<Self> {
        if order.len() != self.n() {
            return Err(Error::argument("label sets differ in size"));
        }
        let perm = self
            .labels
            .iter()
            .map(|l| {
                order
                    .iter()
                    .position(|o| o == l)
                    .ok_or_else(|| Error::argument(format!("label {l:?} missing from target order")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.relabeled(&perm, order.to_vec().into())
    }
}

/// Incremental builder used for stepwise leaf insertion.
#[derive(Debug, Clone)]
pub(crate) struct GraphBuilder {
    pub adj: Vec<Vec<usize>>,
    pub kind: Vec<Option<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl GraphBuilder {
    /// A star joining objects `a`, `b`, `c` through one internal node.
    pub fn star(a: usize, b: usize, c: usize) -> Self {
        let mut g = GraphBuilder {
            adj: Vec::new(),
            kind: Vec::new(),
            edges: Vec::new(),
        };
        let centre = g.add_node(None);
        for obj in [a, b, c] {
            let leaf = g.add_node(Some(obj));
            g.link(centre, leaf);
        }
        g
    }

    fn add_node(&mut self, kind: Option<usize>) -> usize {
        self.adj.push(Vec::with_capacity(3));
        self.kind.push(kind);
        self.adj.len() - 1
    }

    fn link(&mut self, u: usize, v: usize) {
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.edges.push((u, v));
    }

    /// Subdivides edge number `edge` and hangs `object` from the new node.
    pub fn insert_leaf(&mut self, edge: usize, object: usize) {
        let (u, v) = self.edges[edge];
        let w = self.add_node(None);
        let leaf = self.add_node(Some(object));
        for (x, old, new) in [(u, v, w), (v, u, w)] {
            let slot = self.adj[x]
                .iter()
                .position(|&y| y == old)
                .expect("edge endpoints adjacent");
            self.adj[x][slot] = new;
        }
        self.adj[w].extend([u, v]);
        self.edges[edge] = (u, w);
        self.edges.push((w, v));
        self.link(w, leaf);
    }

    pub fn finish(&self, labels: Arc<[String]>) -> LabeledTree {
        LabeledTree::from_graph(labels, &self.adj, &self.kind)
            .expect("stepwise insertion yields a valid tree")
    }
}

/// Every distinct labeled tree over `labels`, by stepwise leaf insertion.
///
/// There are `(2n - 5)!!` of them; intended for small `n` (oracles, tests).
pub fn enumerate_labeled_trees(labels: &[String]) -> Result<Vec<LabeledTree>> {
    let n = labels.len();
    if n < 4 {
        return Err(TreeViolation::TooFewLeaves(n).into());
    }
    if n > 10 {
        return Err(Error::Resource(format!(
            "full enumeration is limited to n <= 10, got {n}"
        )));
    }
    check_labels(labels)?;
    let labels: Arc<[String]> = labels.to_vec().into();
    let mut out = Vec::new();
    let mut stack = vec![(GraphBuilder::star(0, 1, 2), 3)];
    while let Some((g, next)) = stack.pop() {
        if next == n {
            out.push(g.finish(labels.clone()));
            continue;
        }
        for edge in (0..g.edges.len()).rev() {
            let mut child = g.clone();
            child.insert_leaf(edge, next);
            stack.push((child, next + 1));
        }
    }
    Ok(out)
}

/// The Complete Pseudo-Adjacency matrix of a labeled tree.
///
/// A `(2n-2) x (2n-2)` symmetric integer matrix partitioned as
///
/// ```text
/// [ K  L ]   K: internal x internal adjacency (structure)
/// [ L' C ]   L: internal x leaf adjacency, C: quartet coefficients
/// ```
///
/// Adjacent nodes are marked with 1 in `K` and `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompleteMatrix {
    labels: Arc<[String]>,
    dim: usize,
    entries: Vec<u64>,
}

impl CompleteMatrix {
    /// Wraps a raw row-major matrix, checking only shape and symmetry.
    pub fn from_raw(labels: Vec<String>, entries: Vec<u64>) -> Result<Self> {
        let n = labels.len();
        if n < 4 {
            return Err(TreeViolation::TooFewLeaves(n).into());
        }
        let dim = 2 * n - 2;
        if entries.len() != dim * dim {
            return Err(Error::argument(format!(
                "complete matrix for n={n} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::argument(format!(
                        "complete matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(CompleteMatrix {
            labels: labels.into(),
            dim,
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Structure block `K[i][j]`, both indices internal (`0..n-2`).
    pub fn structure(&self, i: usize, j: usize) -> u64 {
        self.get(i, j)
    }

    /// Leaves block `L[i][k]`: internal node `i` against object `k`.
    pub fn leaves(&self, i: usize, k: usize) -> u64 {
        self.get(i, self.n() - 2 + k)
    }

    /// Coefficients block `C[a][b]`.
    pub fn coefficient(&self, a: usize, b: usize) -> u64 {
        let off = self.n() - 2;
        self.get(off + a, off + b)
    }
}

/// Builds the complete matrix of `tree` with `coefficients` (row-major
/// `n x n`, symmetric, zero diagonal) in the `C` block.
pub fn to_complete_matrix(tree: &LabeledTree, coefficients: &[u64]) -> Result<CompleteMatrix> {
    let n = tree.n();
    if coefficients.len() != n * n {
        return Err(Error::argument(format!("coefficient block must be {n}x{n}")));
    }
    for a in 0..n {
        if coefficients[a * n + a] != 0 {
            return Err(Error::argument(format!("coefficient diagonal nonzero at {a}")));
        }
        for b in 0..a {
            if coefficients[a * n + b] != coefficients[b * n + a] {
                return Err(Error::argument(format!(
                    "coefficient block not symmetric at ({a}, {b})"
                )));
            }
        }
    }
    let dim = 2 * n - 2;
    let mut entries = vec![0u64; dim * dim];
    for (u, v) in tree.edges() {
        entries[u * dim + v] = 1;
        entries[v * dim + u] = 1;
    }
    let off = n - 2;
    for a in 0..n {
        for b in 0..n {
            entries[(off + a) * dim + off + b] = coefficients[a * n + b];
        }
    }
    Ok(CompleteMatrix {
        labels: tree.shared_labels().clone(),
        dim,
        entries,
    })
}

/// Recovers the labeled tree encoded in the `K` and `L` blocks.
pub fn from_complete_matrix(matrix: &CompleteMatrix) -> Result<LabeledTree> {
    let n = matrix.n();
    let internal = n - 2;
    let mut internal_edges = Vec::new();
    for i in 0..internal {
        if matrix.structure(i, i) != 0 {
            return Err(TreeViolation::SelfLoop(i).into());
        }
        for j in i + 1..internal {
            if matrix.structure(i, j) > 0 {
                internal_edges.push((i, j));
            }
        }
    }
    let mut internal_adj = vec![Vec::new(); internal];
    for &(i, j) in &internal_edges {
        internal_adj[i].push(j);
        internal_adj[j].push(i);
    }
    if internal_edges.len() != internal - 1 || bfs_order(&internal_adj, 0).len() != internal {
        return Err(TreeViolation::InternalDisconnected.into());
    }
    let mut edges = internal_edges;
    for k in 0..n {
        let attached: Vec<_> = (0..internal).filter(|&i| matrix.leaves(i, k) > 0).collect();
        match attached.as_slice() {
            [] => return Err(TreeViolation::DanglingLeaf(matrix.labels[k].clone()).into()),
            [i] => edges.push((*i, internal + k)),
            _ => {
                return Err(TreeViolation::LeafDegree {
                    node: internal + k,
                    label: matrix.labels[k].clone(),
                    degree: attached.len(),
                }
                .into())
            }
        }
    }
    Ok(LabeledTree::with_shared_labels(matrix.labels.clone(), &edges)?)
}
