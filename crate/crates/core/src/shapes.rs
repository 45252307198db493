//! Unlabeled tree shapes and their generation up to isomorphism.
//!
//! A shape over `n` leaves is the tree formed by the `n - 2` internal nodes
//! together with how many leaves (0, 1 or 2) hang from each. Shapes for `n`
//! leaves are grown from shapes for `n - 1` leaves by replacing one leaf
//! with a new internal node carrying two leaves; every shape arises this way
//! because removing any cherry-bearing internal leaf reverses the step.
//!
//! Candidates are deduplicated with the algebraic invariants of the
//! structure matrix as a prefilter and an exact canonical code as the
//! authority.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{LabeledTree, NodeId};

pub const DEFAULT_MAX_SHAPE_N: usize = 14;
/// Spectra closer than this, elementwise, count as equal.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopologyShape {
    n: usize,
    internal_edges: Vec<(usize, usize)>,
    leaf_slots: Vec<u8>,
}

impl TopologyShape {
    pub fn new(internal_edges: Vec<(usize, usize)>, leaf_slots: Vec<u8>) -> Result<Self> {
        let k = leaf_slots.len();
        if k < 2 {
            return Err(Error::argument("a shape needs at least two internal nodes"));
        }
        if internal_edges.len() != k - 1 {
            return Err(Error::argument(format!(
                "{k} internal nodes need {} internal edges, got {}",
                k - 1,
                internal_edges.len()
            )));
        }
        let mut degree = vec![0usize; k];
        let mut adj = vec![Vec::new(); k];
        for &(u, v) in &internal_edges {
            if u >= k || v >= k || u == v {
                return Err(Error::argument(format!("bad internal edge ({u}, {v})")));
            }
            degree[u] += 1;
            degree[v] += 1;
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, (&d, &s)) in degree.iter().zip(&leaf_slots).enumerate() {
            if d + s as usize != 3 {
                return Err(Error::argument(format!(
                    "internal node {v} has degree {}",
                    d + s as usize
                )));
            }
        }
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !std::mem::replace(&mut seen[v], true) {
                    stack.push(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::argument("internal nodes are disconnected"));
        }
        let n = leaf_slots.iter().map(|&s| s as usize).sum();
        Ok(TopologyShape {
            n,
            internal_edges,
            leaf_slots,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn internal_count(&self) -> usize {
        self.leaf_slots.len()
    }

    pub fn internal_edges(&self) -> &[(usize, usize)] {
        &self.internal_edges
    }

    pub fn leaf_slots(&self) -> &[u8] {
        &self.leaf_slots
    }

    pub fn internal_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.internal_count()];
        for &(u, v) in &self.internal_edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// The structure matrix `K` (row-major, unit entries).
    pub fn structure_matrix(&self) -> Vec<i64> {
        let k = self.internal_count();
        let mut m = vec![0i64; k * k];
        for &(u, v) in &self.internal_edges {
            m[u * k + v] = 1;
            m[v * k + u] = 1;
        }
        m
    }

    /// Leaf positions: one entry per leaf slot giving its internal node, in
    /// node order. Position `p` receives object `assignment[p]`.
    pub fn positions(&self) -> Vec<NodeId> {
        self.leaf_slots
            .iter()
            .enumerate()
            .flat_map(|(v, &s)| std::iter::repeat_n(v, s as usize))
            .collect()
    }

    /// Places objects on the leaf positions: `assignment[p]` is the object
    /// hung at position `p` (see [`positions`](Self::positions)).
    pub fn to_labeled_tree(&self, assignment: &[usize], labels: Arc<[String]>) -> Result<LabeledTree> {
        let k = self.internal_count();
        if assignment.len() != self.n || labels.len() != self.n {
            return Err(Error::argument("assignment does not cover every leaf position"));
        }
        let mut edges = self.internal_edges.clone();
        for (p, v) in self.positions().into_iter().enumerate() {
            edges.push((v, k + assignment[p]));
        }
        Ok(LabeledTree::with_shared_labels(labels, &edges)?)
    }

    /// Same shape with internal nodes renamed: node `v` becomes `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let k = self.internal_count();
        if perm.len() != k {
            return Err(Error::argument(
                "permutation length does not match internal node count",
            ));
        }
        let mut slots = vec![0u8; k];
        for v in 0..k {
            slots[perm[v]] = self.leaf_slots[v];
        }
        Self::new(
            self.internal_edges
                .iter()
                .map(|&(u, v)| (perm[u], perm[v]))
                .collect(),
            slots,
        )
    }
}

/// The single-branch shape: internal nodes on a path, two leaves at each end
/// and one on every inner node.
pub fn initial_caterpillar(n: usize) -> Result<TopologyShape> {
    if n < 4 {
        return Err(Error::argument(format!("a shape needs n >= 4, got {n}")));
    }
    let k = n - 2;
    let edges = (0..k - 1).map(|i| (i, i + 1)).collect();
    let mut slots = vec![1u8; k];
    slots[0] = 2;
    slots[k - 1] = 2;
    TopologyShape::new(edges, slots)
}

/// An exact isomorphism certificate for a shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The code is printable ASCII: `U` or `B` (one or two centres), then one
/// `(slots children...)` group per internal node.
impl std::fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

/// Rooted canonical form over the centre of the internal tree, with each
/// node's leaf count folded into its code. Equal codes iff isomorphic.
pub fn canonical_code(shape: &TopologyShape) -> CanonicalCode {
    let adj = shape.internal_adjacency();
    let k = adj.len();

    // peel internal-tree leaves layer by layer down to the centre
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..k).filter(|&v| degree[v] <= 1).collect();
    let mut removed = vec![false; k];
    let mut remaining = k;
    while remaining > 2 {
        remaining -= layer.len();
        for &v in &layer {
            removed[v] = true;
        }
        let mut next = Vec::new();
        for &v in &layer {
            for &u in &adj[v] {
                if !removed[u] {
                    degree[u] -= 1;
                    if degree[u] == 1 {
                        next.push(u);
                    }
                }
            }
        }
        layer = next;
    }

    let encode = |root: usize, parent: usize| -> Vec<u8> {
        let mut out = Vec::new();
        encode_rooted(&adj, &shape.leaf_slots, root, parent, &mut out);
        out
    };
    let mut code = Vec::with_capacity(4 * k);
    match layer.as_slice() {
        [c] => {
            code.push(b'U');
            code.extend(encode(*c, usize::MAX));
        }
        [a, b] => {
            let mut halves = [encode(*a, *b), encode(*b, *a)];
            halves.sort();
            code.push(b'B');
            code.extend(halves.concat());
        }
        _ => unreachable!("a tree has one or two centres"),
    }
    CanonicalCode(code)
}

fn encode_rooted(adj: &[Vec<usize>], slots: &[u8], v: usize, parent: usize, out: &mut Vec<u8>) {
    let mut children: Vec<Vec<u8>> = adj[v]
        .iter()
        .filter(|&&c| c != parent)
        .map(|&c| {
            let mut sub = Vec::new();
            encode_rooted(adj, slots, c, v, &mut sub);
            sub
        })
        .collect();
    children.sort();
    out.push(b'(');
    out.push(b'0' + slots[v]);
    for c in children {
        out.extend(c);
    }
    out.push(b')');
}

/// Characteristic polynomial, determinant, trace and sorted leaf slots.
pub type SignatureKey = (Vec<i64>, i64, i64, Vec<u8>);

/// Algebraic invariants of the structure matrix `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSignature {
    /// Coefficients of `det(xI - K)`, leading coefficient first.
    pub characteristic_polynomial: Vec<i64>,
    /// Eigenvalues of `K`, ascending.
    pub spectrum: Vec<f64>,
    pub determinant: i64,
    pub trace: i64,
    /// Leaf counts per internal node, sorted.
    pub leaf_slots: Vec<u8>,
}

impl InvariantSignature {
    /// The integer part, usable as a hash key.
    pub fn exact_key(&self) -> SignatureKey {
        (
            self.characteristic_polynomial.clone(),
            self.determinant,
            self.trace,
            self.leaf_slots.clone(),
        )
    }

    pub fn matches(&self, other: &Self) -> bool {
        self.characteristic_polynomial == other.characteristic_polynomial
            && self.determinant == other.determinant
            && self.trace == other.trace
            && self.leaf_slots == other.leaf_slots
            && self.spectrum.len() == other.spectrum.len()
            && self
                .spectrum
                .iter()
                .zip(&other.spectrum)
                .all(|(a, b)| (a - b).abs() <= SPECTRUM_TOLERANCE)
    }
}

/// Characteristic polynomial of a square integer matrix by the
/// Faddeev-LeVerrier recurrence, in exact integer arithmetic.
pub fn characteristic_polynomial(matrix: &[i64], k: usize) -> Vec<i64> {
    let a: Vec<i128> = matrix.iter().map(|&x| x as i128).collect();
    let mut coeffs = vec![1i128];
    let mut m = vec![0i128; k * k];
    for step in 1..=k {
        // M <- A * M + c_{step-1} I
        let prev = *coeffs.last().expect("nonempty");
        let mut next = vec![0i128; k * k];
        for i in 0..k {
            for j in 0..k {
                let mut s = 0i128;
                for l in 0..k {
                    s += a[i * k + l] * m[l * k + j];
                }
                next[i * k + j] = s;
            }
            next[i * k + i] += prev;
        }
        m = next;
        let mut trace = 0i128;
        for i in 0..k {
            for l in 0..k {
                trace += a[i * k + l] * m[l * k + i];
            }
        }
        debug_assert_eq!(trace % step as i128, 0);
        coeffs.push(-trace / step as i128);
    }
    coeffs.into_iter().map(|c| c as i64).collect()
}

pub fn invariant_signature(shape: &TopologyShape) -> InvariantSignature {
    let k = shape.internal_count();
    let matrix = shape.structure_matrix();
    let characteristic_polynomial = characteristic_polynomial(&matrix, k);
    let constant = characteristic_polynomial[k];
    let determinant = if k.is_multiple_of(2) { constant } else { -constant };
    let trace = -characteristic_polynomial[1];
    let dense = DMatrix::from_row_slice(k, k, &matrix.iter().map(|&x| x as f64).collect::<Vec<_>>());
    let mut spectrum: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
    spectrum.sort_by(f64::total_cmp);
    let mut leaf_slots = shape.leaf_slots.clone();
    leaf_slots.sort_unstable();
    InvariantSignature {
        characteristic_polynomial,
        spectrum,
        determinant,
        trace,
        leaf_slots,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShapeConfig {
    pub max_n: usize,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        ShapeConfig {
            max_n: DEFAULT_MAX_SHAPE_N,
        }
    }
}

/// Every shape grown from `shape` by turning one of its leaves into a new
/// internal node carrying two leaves.
pub fn grow(shape: &TopologyShape) -> Vec<TopologyShape> {
    let k = shape.internal_count();
    (0..k)
        .filter(|&v| shape.leaf_slots[v] > 0)
        .map(|v| {
            let mut edges = shape.internal_edges.clone();
            edges.push((v, k));
            let mut slots = shape.leaf_slots.clone();
            slots[v] -= 1;
            slots.push(2);
            TopologyShape::new(edges, slots).expect("growth keeps degrees at 3")
        })
        .collect()
}

struct Seen {
    signature: InvariantSignature,
    code: CanonicalCode,
}

/// One representative per isomorphism class of shapes with `n` leaves,
/// sorted by canonical code.
pub fn generate_shapes(n: usize, config: &ShapeConfig) -> Result<Vec<TopologyShape>> {
    if n < 4 {
        return Err(Error::argument(format!("a shape needs n >= 4, got {n}")));
    }
    if n > config.max_n {
        return Err(Error::Resource(format!(
            "shape generation is capped at n = {}, got {n}",
            config.max_n
        )));
    }
    let mut level = vec![initial_caterpillar(4)?];
    for _ in 4..n {
        let candidates: Vec<(TopologyShape, InvariantSignature, CanonicalCode)> = level
            .par_iter()
            .flat_map_iter(grow)
            .map(|s| {
                let sig = invariant_signature(&s);
                let code = canonical_code(&s);
                (s, sig, code)
            })
            .collect();
        let mut buckets: HashMap<SignatureKey, Vec<Seen>> = HashMap::new();
        let mut kept = Vec::new();
        for (shape, signature, code) in candidates {
            let bucket = buckets.entry(signature.exact_key()).or_default();
            let duplicate = bucket
                .iter()
                .any(|seen| seen.signature.matches(&signature) && seen.code == code);
            if !duplicate {
                bucket.push(Seen {
                    signature,
                    code: code.clone(),
                });
                kept.push((code, shape));
            }
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        level = kept.into_iter().map(|(_, s)| s).collect();
    }
    Ok(level)
}
