//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every exported function returns JSON text; the page parses it and draws
//! trees as SVG from the precomputed layout.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use mqtc::hill::restart_rng;
use mqtc::io::write_distance_matrix;
use mqtc::{
    canonical_code, generate_shapes, parse_distance_matrix, solve_exact, solve_hill_climbing, to_newick,
    DistanceMatrix, Error, ExactConfig, LabeledTree, MatrixFormat, SearchConfig, ShapeConfig,
};

/// Largest instance the page will hand to the exact solver.
pub const DEMO_MAX_EXACT_N: usize = 10;
/// Largest instance the page will generate at all.
pub const DEMO_MAX_N: usize = 40;

#[derive(Debug, Clone, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Layout {
    pub nodes: Vec<Point>,
    pub edges: Vec<(usize, usize)>,
}

/// Equal-angle drawing of an unrooted tree: every subtree gets a wedge of
/// the circle proportional to its leaf count. Coordinates are scaled into
/// the unit square.
pub fn layout(tree: &LabeledTree) -> Layout {
    let count = tree.node_count();
    let root = 0;
    // parent links and a preorder from the root
    let mut parent = vec![usize::MAX; count];
    let mut order = vec![root];
    parent[root] = root;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for &w in tree.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                order.push(w);
            }
        }
        i += 1;
    }
    let mut leaves = vec![0usize; count];
    for &v in order.iter().rev() {
        if tree.is_leaf(v) {
            leaves[v] = 1;
        }
        if v != root {
            leaves[parent[v]] += leaves[v];
        }
    }

    let mut pos = vec![(0.0f64, 0.0f64); count];
    let mut wedge = vec![(0.0f64, std::f64::consts::TAU); count];
    for &v in &order {
        let (start, width) = wedge[v];
        let mut cursor = start;
        for &w in tree.neighbors(v) {
            if w == parent[v] {
                continue;
            }
            let share = width * leaves[w] as f64 / leaves[v] as f64;
            let mid = cursor + share / 2.0;
            pos[w] = (pos[v].0 + mid.cos(), pos[v].1 + mid.sin());
            wedge[w] = (cursor, share);
            cursor += share;
        }
    }

    let (min_x, max_x) = pos
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let (min_y, max_y) = pos
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let span = (max_x - min_x).max(max_y - min_y).max(f64::EPSILON);
    let nodes = (0..count)
        .map(|v| Point {
            x: (pos[v].0 - min_x) / span,
            y: (pos[v].1 - min_y) / span,
            label: tree.label_of(v).map(str::to_string),
        })
        .collect();
    Layout {
        nodes,
        edges: tree.edges(),
    }
}

/// `n` random points in the plane; distances are Euclidean, divided by the
/// largest one. Returned as CSV.
pub fn random_instance_csv(n: usize, seed: u64) -> Result<String, Error> {
    if !(4..=DEMO_MAX_N).contains(&n) {
        return Err(Error::Size(format!(
            "the demo takes 4 to {DEMO_MAX_N} objects, got {n}"
        )));
    }
    let mut rng = restart_rng(seed, 0);
    // a few clusters make the optimal tree worth looking at
    let centers: Vec<(f64, f64)> = (0..3).map(|_| (rng.random(), rng.random())).collect();
    let points: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (cx, cy) = centers[i % centers.len()];
            (cx + 0.15 * rng.random::<f64>(), cy + 0.15 * rng.random::<f64>())
        })
        .collect();
    let raw = |a: usize, b: usize| (points[a].0 - points[b].0).hypot(points[a].1 - points[b].1);
    let longest = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| raw(a, b))
        .fold(0.0, f64::max);
    let labels = (0..n).map(|i| format!("o{}", i + 1)).collect();
    let dist = DistanceMatrix::from_fn(labels, |a, b| if a == b { 0.0 } else { raw(a, b) / longest })?;
    Ok(write_distance_matrix(&dist, MatrixFormat::Csv))
}

#[derive(Serialize)]
struct Solved {
    newick: String,
    cost: f64,
    normalized_score: f64,
    min: f64,
    max: f64,
    shapes_evaluated: u64,
    assignments_evaluated: u64,
    elapsed_ms: f64,
    layout: Layout,
}

pub fn solve_json(csv: &str, mode: &str, seed: u64, restarts: usize) -> Result<String, Error> {
    let dist = parse_distance_matrix(csv, MatrixFormat::Csv)?;
    let result = match mode {
        "exact" => {
            let config = ExactConfig {
                max_n: DEMO_MAX_EXACT_N,
                ..ExactConfig::default()
            };
            solve_exact(&dist, &config)?
        }
        "hill" => {
            let config = SearchConfig {
                seed,
                restarts,
                ..SearchConfig::default()
            };
            solve_hill_climbing(&dist, &config)?
        }
        other => return Err(Error::Argument(format!("unknown mode {other:?}"))),
    };
    let solved = Solved {
        newick: to_newick(&result.best_tree),
        cost: result.best_cost,
        normalized_score: result.normalized_score,
        min: result.bounds.min,
        max: result.bounds.max,
        shapes_evaluated: result.shapes_evaluated,
        assignments_evaluated: result.assignments_evaluated,
        elapsed_ms: result.elapsed.as_secs_f64() * 1e3,
        layout: layout(&result.best_tree),
    };
    Ok(serde_json::to_string(&solved).expect("plain data"))
}

#[derive(Serialize)]
struct ShapeView {
    code: String,
    leaf_slots: Vec<u8>,
    layout: Layout,
}

pub fn shapes_json(n: usize) -> Result<String, Error> {
    let all = generate_shapes(n, &ShapeConfig::default())?;
    let labels: Arc<[String]> = (0..n).map(|i| format!("{}", i + 1)).collect::<Vec<_>>().into();
    let identity: Vec<usize> = (0..n).collect();
    let views = all
        .iter()
        .map(|s| {
            let tree = s.to_labeled_tree(&identity, labels.clone())?;
            Ok(ShapeView {
                code: canonical_code(s).to_string(),
                leaf_slots: s.leaf_slots().to_vec(),
                layout: layout(&tree),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(serde_json::to_string(&views).expect("plain data"))
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = randomInstance)]
pub fn random_instance(n: usize, seed: u32) -> Result<String, JsError> {
    random_instance_csv(n, seed.into()).map_err(js)
}

#[wasm_bindgen]
pub fn solve(csv: &str, mode: &str, seed: u32, restarts: usize) -> Result<String, JsError> {
    solve_json(csv, mode, seed.into(), restarts).map_err(js)
}

#[wasm_bindgen]
pub fn shapes(n: usize) -> Result<String, JsError> {
    shapes_json(n).map_err(js)
}
