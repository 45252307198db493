use std::path::Path;
use std::process::Command;

use mqtc::{parse_distance_matrix, MatrixFormat, RunReport};
use mqtc_cli::{EXIT_INPUT, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE};

const QUARTET_CSV: &str = "a,b,c,d\n0,0.1,0.9,0.9\n0.1,0,0.9,0.9\n0.9,0.9,0,0.1\n0.9,0.9,0.1,0\n";

fn mqtc(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mqtc").chain(args.iter().copied());
    let status = mqtc_cli::run(argv, &mut out, &mut err);
    (
        status,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn shapes_prints_the_count() {
    assert_eq!(
        mqtc(&["shapes", "--n", "6"]),
        (EXIT_OK, "2\n".into(), String::new())
    );
    let (status, out, _) = mqtc(&["shapes", "--n", "8", "--list"]);
    assert_eq!(status, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "4");
    assert_eq!(lines.len(), 5);
}

#[test]
fn solve_then_verify_reproduces_the_cost() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "q.csv", QUARTET_CSV);
    let tree = dir.path().join("q.nwk");
    let report = dir.path().join("q.json");
    let (status, _, _) = mqtc(&[
        "solve",
        "--input",
        &input,
        "--mode",
        "exact",
        "--output-tree",
        tree.to_str().unwrap(),
        "--output-report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(status, EXIT_OK);
    assert_eq!(std::fs::read_to_string(&tree).unwrap(), "(a,b,(c,d));\n");
    let r = RunReport::from_json(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.best_cost, 0.2);
    assert_eq!(r.newick, "(a,b,(c,d));");
    assert_eq!(r.mode, "exact");
    assert_eq!(r.seed, None);
    assert_eq!(r.n, 4);

    let (status, out, _) = mqtc(&["verify", "--input", &input, "--tree", tree.to_str().unwrap()]);
    assert_eq!(status, EXIT_OK);
    let cost: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("cost "))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(cost.to_bits(), r.best_cost.to_bits());
}

#[test]
fn hill_mode_records_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "q.csv", QUARTET_CSV);
    let (status, out, _) = mqtc(&["solve", "--input", &input, "--mode", "hill", "--seed", "9", "-q"]);
    assert_eq!(status, EXIT_OK);
    let (newick, json) = out.split_once('\n').unwrap();
    assert_eq!(newick, "(a,b,(c,d));");
    let r = RunReport::from_json(json).unwrap();
    assert_eq!(r.seed, Some(9));
    assert_eq!(r.mode, "hill");
}

#[test]
fn phylip_input_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "q.csv", QUARTET_CSV);
    let phy = write(
        dir.path(),
        "q.phy",
        "4\na 0 0.1 0.9 0.9\nb 0.1 0 0.9 0.9\nc 0.9 0.9 0 0.1\nd 0.9 0.9 0.1 0\n",
    );
    let a = mqtc(&["solve", "--input", &csv, "-q"]);
    let b = mqtc(&["solve", "--input", &phy, "--format", "phylip", "-q"]);
    let digest = |out: &str| {
        RunReport::from_json(out.split_once('\n').unwrap().1)
            .unwrap()
            .input_digest
    };
    assert_eq!(digest(&a.1), digest(&b.1));
}

#[test]
fn exit_statuses_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad_range = write(
        dir.path(),
        "range.csv",
        "a,b,c,d\n0,1.5,0.9,0.9\n1.5,0,0.9,0.9\n0.9,0.9,0,0.1\n0.9,0.9,0.1,0\n",
    );
    let asym = write(
        dir.path(),
        "asym.csv",
        "a,b,c,d\n0,0.2,0.9,0.9\n0.1,0,0.9,0.9\n0.9,0.9,0,0.1\n0.9,0.9,0.1,0\n",
    );
    let small = write(
        dir.path(),
        "small.csv",
        "a,b,c\n0,0.1,0.1\n0.1,0,0.1\n0.1,0.1,0\n",
    );
    let good = write(dir.path(), "q.csv", QUARTET_CSV);

    assert_eq!(mqtc(&[]).0, EXIT_USAGE);
    assert_eq!(mqtc(&["solve"]).0, EXIT_USAGE);
    assert_eq!(
        mqtc(&["solve", "--input", &good, "--mode", "greedy"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        mqtc(&["solve", "--input", &good, "--mode", "hill", "--restarts", "0"]).0,
        EXIT_USAGE
    );
    assert_eq!(mqtc(&["shapes", "--n", "3"]).0, EXIT_USAGE);
    assert_eq!(mqtc(&["--help"]).0, EXIT_OK);
    assert_eq!(mqtc(&["--version"]).0, EXIT_OK);

    let (status, _, err) = mqtc(&["solve", "--input", &bad_range]);
    assert_eq!(status, EXIT_INPUT);
    assert!(err.contains("outside [0, 1]"), "{err}");
    let (status, _, err) = mqtc(&["solve", "--input", &asym]);
    assert_eq!(status, EXIT_INPUT);
    assert!(err.contains("worst cell (a, b)"), "{err}");
    assert_eq!(mqtc(&["solve", "--input", &small]).0, EXIT_INPUT);
    assert_eq!(mqtc(&["solve", "--input", "/nonexistent/x.csv"]).0, EXIT_INPUT);
    assert_eq!(
        mqtc(&["verify", "--input", &good, "--tree", "(a,b,(c,e));"]).0,
        EXIT_INPUT
    );
    assert_eq!(
        mqtc(&["verify", "--input", &good, "--tree", "(a,b,(c,d)"]).0,
        EXIT_INPUT
    );

    assert_eq!(mqtc(&["shapes", "--n", "40"]).0, EXIT_RESOURCE);
}

#[test]
fn exact_ceiling_is_enforced_by_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let labels: Vec<String> = (0..6).map(|i| format!("o{i}")).collect();
    let mut text = labels.join(",") + "\n";
    for a in 0..6 {
        let row: Vec<String> = (0..6)
            .map(|b| if a == b { "0".into() } else { "0.5".into() })
            .collect();
        text += &(row.join(",") + "\n");
    }
    let input = write(dir.path(), "six.csv", &text);
    parse_distance_matrix(&text, MatrixFormat::Csv).unwrap();

    let bin = env!("CARGO_BIN_EXE_mqtc");
    let capped = Command::new(bin)
        .args(["solve", "--input", &input, "-q"])
        .env("MQTC_MAX_N", "5")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(EXIT_RESOURCE));
    let open = Command::new(bin)
        .args(["solve", "--input", &input, "-q"])
        .env("MQTC_MAX_N", "6")
        .output()
        .unwrap();
    assert_eq!(open.status.code(), Some(EXIT_OK));
    let junk = Command::new(bin)
        .args(["solve", "--input", &input])
        .env("MQTC_MAX_N", "many")
        .output()
        .unwrap();
    assert_eq!(junk.status.code(), Some(EXIT_USAGE));
}
