mod common;

use std::collections::HashSet;

use common::{names, random_matrix, rng};
use mqtc::quartet::cost_tolerance;
use mqtc::{
    cost_bounds, count_labeled_trees, double_factorial, enumerate_assignments, enumerate_labeled_trees,
    generate_shapes, random_tree, solve_exact, to_newick, tree_cost, tree_cost_bruteforce, ExactConfig,
    Pruning, ShapeConfig,
};

#[test]
fn enumeration_reaches_every_labeled_tree() {
    for (n, expected) in [(4, 3), (5, 15), (6, 105), (7, 945)] {
        assert_eq!(count_labeled_trees(n, &ExactConfig::default()).unwrap(), expected);
        assert_eq!(double_factorial(2 * n as u64 - 5), expected as u128);
    }
}

#[test]
fn unpruned_stream_covers_the_same_trees() {
    let labels: std::sync::Arc<[String]> = names(6).into();
    for shape in generate_shapes(6, &ShapeConfig::default()).unwrap() {
        let full: HashSet<String> = enumerate_assignments(&shape, Pruning::None)
            .map(|a| to_newick(&shape.to_labeled_tree(&a, labels.clone()).unwrap()))
            .collect();
        let pruned: Vec<String> = enumerate_assignments(&shape, Pruning::Cherries)
            .map(|a| to_newick(&shape.to_labeled_tree(&a, labels.clone()).unwrap()))
            .collect();
        let pruned_set: HashSet<String> = pruned.iter().cloned().collect();
        assert_eq!(full, pruned_set);
        assert!(pruned.len() < enumerate_assignments(&shape, Pruning::None).count());
    }
}

#[test]
fn optimum_matches_full_enumeration() {
    let mut r = rng(31);
    for n in 4..=7 {
        for _ in 0..3 {
            let d = random_matrix(n, &mut r);
            let res = solve_exact(&d, &ExactConfig::default()).unwrap();
            let trees = enumerate_labeled_trees(d.labels()).unwrap();
            let (best_tree, best) = trees
                .iter()
                .map(|t| (t, tree_cost_bruteforce(t, &d).unwrap()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!((res.best_cost - best).abs() <= cost_tolerance(n), "n={n}");
            assert_eq!(to_newick(&res.best_tree), to_newick(best_tree));
            assert_eq!(
                res.distinct_labeled_trees as u128,
                double_factorial(2 * n as u64 - 5)
            );
            let bounds = cost_bounds(&d);
            assert!(res.normalized_score >= 0.0 && res.normalized_score <= 1.0);
            assert_eq!(res.bounds, bounds);
        }
    }
}

#[test]
fn optimum_beats_random_trees_at_nine() {
    let mut r = rng(32);
    let d = random_matrix(9, &mut r);
    let res = solve_exact(&d, &ExactConfig::default()).unwrap();
    assert_eq!(res.shapes_evaluated, 6);
    for _ in 0..1000 {
        let t = random_tree(d.labels(), &mut r).unwrap();
        assert!(res.best_cost <= tree_cost(&t, &d).unwrap() + cost_tolerance(9));
    }
}

#[test]
fn result_does_not_depend_on_thread_count() {
    let d = random_matrix(8, &mut rng(33));
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| solve_exact(&d, &ExactConfig::default()).unwrap())
    };
    let one = run(1);
    for threads in [2, 4] {
        assert!(one.same_outcome(&run(threads)), "threads={threads}");
    }
}

#[test]
fn ties_resolve_to_the_same_tree_at_any_thread_count() {
    // every tree costs the same on a uniform matrix
    let d = mqtc::DistanceMatrix::from_fn(names(7), |a, b| if a == b { 0.0 } else { 0.5 }).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| solve_exact(&d, &ExactConfig::default()).unwrap())
    };
    let one = run(1);
    let all = enumerate_labeled_trees(d.labels()).unwrap();
    let smallest = all.iter().map(to_newick).min().unwrap();
    assert_eq!(to_newick(&one.best_tree), smallest);
    assert!(one.same_outcome(&run(3)));
}

#[test]
fn pruning_never_changes_the_optimum() {
    let mut r = rng(34);
    for n in 4..=6 {
        for _ in 0..5 {
            let d = random_matrix(n, &mut r);
            let pruned = solve_exact(&d, &ExactConfig::default()).unwrap();
            let full = solve_exact(
                &d,
                &ExactConfig {
                    pruning: Pruning::None,
                    ..ExactConfig::default()
                },
            )
            .unwrap();
            assert_eq!(pruned.best_tree, full.best_tree);
            assert_eq!(pruned.best_cost.to_bits(), full.best_cost.to_bits());
            assert!(pruned.assignments_evaluated < full.assignments_evaluated);
        }
    }
}
