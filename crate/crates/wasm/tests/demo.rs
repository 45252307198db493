use mqtc::{parse_distance_matrix, random_tree, MatrixFormat};
use mqtc_wasm::{layout, random_instance_csv, shapes_json, solve_json};

#[test]
fn random_instances_parse_and_repeat() {
    let a = random_instance_csv(9, 3).unwrap();
    assert_eq!(a, random_instance_csv(9, 3).unwrap());
    assert_ne!(a, random_instance_csv(9, 4).unwrap());
    let d = parse_distance_matrix(&a, MatrixFormat::Csv).unwrap();
    assert_eq!(d.n(), 9);
    assert!(random_instance_csv(3, 1).is_err());
    assert!(random_instance_csv(41, 1).is_err());
}

#[test]
fn both_modes_return_a_drawable_tree() {
    let csv = random_instance_csv(7, 11).unwrap();
    let exact: serde_json::Value = serde_json::from_str(&solve_json(&csv, "exact", 1, 5).unwrap()).unwrap();
    let hill: serde_json::Value = serde_json::from_str(&solve_json(&csv, "hill", 1, 5).unwrap()).unwrap();
    assert!(hill["cost"].as_f64().unwrap() >= exact["cost"].as_f64().unwrap() - 1e-9);
    assert_eq!(exact["layout"]["nodes"].as_array().unwrap().len(), 12);
    assert_eq!(exact["layout"]["edges"].as_array().unwrap().len(), 11);
    assert!(solve_json(&csv, "annealing", 1, 5).is_err());
    let big = random_instance_csv(11, 1).unwrap();
    assert!(solve_json(&big, "exact", 1, 5).is_err());
}

#[test]
fn shapes_listing_matches_the_count() {
    let v: serde_json::Value = serde_json::from_str(&shapes_json(9).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
}

#[test]
fn layout_stays_in_the_unit_square_without_collapsed_nodes() {
    let names: Vec<String> = (0..25).map(|i| format!("x{i}")).collect();
    let t = random_tree(&names, &mut mqtc::hill::restart_rng(5, 0)).unwrap();
    let l = layout(&t);
    assert_eq!(l.nodes.len(), t.node_count());
    for (i, p) in l.nodes.iter().enumerate() {
        assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
        assert_eq!(p.label.is_some(), t.is_leaf(i));
        for q in &l.nodes[i + 1..] {
            assert!((p.x - q.x).hypot(p.y - q.y) > 1e-6);
        }
    }
}
