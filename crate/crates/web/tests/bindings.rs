use tempoly_web::{fast_forward_check, parse_targets, plan_query, rewind_curve};

#[test]
fn targets_parse() {
    assert_eq!(parse_targets(" 1, -0.5 ,2").unwrap(), vec![1.0, -0.5, 2.0]);
    assert!(parse_targets("1, x").is_err());
}

#[test]
fn plan_query_reports_both_outcomes() {
    let ok = plan_query(2, 1.0, "1, -0.5", 0).unwrap();
    assert_eq!(ok["feasible"], true);
    assert_eq!(ok["verification"]["pass"], true);
    let bad = plan_query(3, 1.0, "-1", 0).unwrap();
    assert_eq!(bad["feasible"], false);
    assert_eq!(bad["min_budget"], 2.0);
    assert!(bad.get("schedule").is_none());
    assert!(plan_query(1, 1.0, "1", 0).is_err());
}

#[test]
fn rewind_curve_halves_per_step() {
    let pts = rewind_curve(2, 4000, 5).unwrap();
    assert_eq!(pts.len(), 3);
    for w in pts.windows(2) {
        let ratio = w[1].canonical / w[0].canonical;
        assert!((0.35..0.65).contains(&ratio), "{ratio}");
    }
    let (a, b) = (&pts[0], &pts[2]);
    let tol = 4.0 * (a.sequential_stderr.powi(2) + b.sequential_stderr.powi(2)).sqrt();
    assert!((a.sequential - b.sequential).abs() < tol);
}

#[test]
fn fast_forward_and_rewind_pass() {
    let f = fast_forward_check(2, 0, 1, true, 6, 0).unwrap();
    assert_eq!(f["pass"], true, "{f}");
    assert_eq!(f["steps"], 2);
    let r = fast_forward_check(3, 2, 1, false, 2, 0).unwrap();
    assert_eq!(r["pass"], true, "{r}");
    assert!(fast_forward_check(4, 0, 1, true, 1, 0).is_err());
}
