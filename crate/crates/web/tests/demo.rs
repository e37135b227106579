use serde_json::Value;
use tspn_web::{direction_json, solve_json, sparsify_json};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn solve_square_returns_svg_and_bound() {
    let v = parse(&solve_json("2 4\n1 0 0\n1 0 1\n0 1 0\n0 1 1\n", 0.5, false).unwrap());
    assert_eq!(v["feasible"], true);
    let len = v["length"].as_f64().unwrap();
    assert!(len <= 1.5 * v["box_length"].as_f64().unwrap() + 1e-9);
    assert!(v["svg"].as_str().unwrap().starts_with("<svg"));
}

#[test]
fn solve_3d_has_no_svg() {
    let v = parse(&solve_json("3 3\n1 0 0 1\n0 1 0 1\n0 0 1 1\n", 1.0, true).unwrap());
    assert!(v["svg"].is_null());
    assert_eq!(v["feasible"], true);
}

#[test]
fn solve_reports_parse_errors() {
    let e = solve_json("2 1\n1 2\n", 0.5, false).unwrap_err();
    assert!(e.contains("line 2"), "{e}");
}

#[test]
fn sparsify_keeps_containment() {
    let v = parse(&sparsify_json(80, 0.5, 3).unwrap());
    assert!(v["selected"].as_u64().unwrap() <= v["vertices"].as_u64().unwrap());
    assert!(v["containment_margin"].as_f64().unwrap() >= -1e-9);
    assert_eq!(v["svg"].as_str().unwrap().matches("<polygon").count(), 3);
    assert!(sparsify_json(2, 0.5, 0).is_err());
}

#[test]
fn direction_ratio_within_sandwich() {
    for (x, y) in [(1.0, 0.0), (3.0, -2.0), (-0.1, 5.0), (1.0, 1.0)] {
        let v = parse(&direction_json(x, y, 0.5).unwrap());
        let r = v["ratio"].as_f64().unwrap();
        assert!((1.0 / 1.5..=1.5).contains(&r), "{x},{y}: {r}");
    }
    let v = parse(&direction_json(-0.1, 5.0, 0.5).unwrap());
    assert_eq!(v["major"], 1);
    assert!(direction_json(1.0, 0.0, 0.0).is_err());
}
