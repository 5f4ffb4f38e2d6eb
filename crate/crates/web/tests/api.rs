use lowmem_web::{analyze_target, run_series, small_sweep};
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

#[test]
fn series_ends_in_consensus() {
    let v = parse(run_series("simple-async", 512, 0.75, 1));
    assert_eq!(v["kind_names"].as_array().unwrap().len(), 4);
    let times = v["times"].as_array().unwrap().len();
    assert!(times > 50);
    for row in v["counts"].as_array().unwrap() {
        assert_eq!(row.as_array().unwrap().len(), times);
    }
    assert_eq!(v["success"], true);
}

#[test]
fn analyze_toy_and_protocol() {
    let v = parse(analyze_target("copy-then-stop", "async", 0, 1.0));
    assert_eq!(v["reachable_count"], 4);
    assert_eq!(v["terminal_count"], 2);
    let v = parse(analyze_target("simple-async", "async", 1024, 0.02));
    assert_eq!(v["terminal_count"], 2);
    assert!(analyze_target("nonsense", "async", 64, 1.0).is_err());
    assert!(analyze_target("copy-then-stop", "sideways", 64, 1.0).is_err());
}

#[test]
fn sweep_cells() {
    let v = parse(small_sweep("baseline-3state", &[256, 512], 0.8, 3));
    let cells = v.as_array().unwrap();
    assert_eq!(cells.len(), 2);
    assert_eq!(cells[1]["n"], 512);
    assert_eq!(cells[1]["consensus"], 3);
    assert!(cells[0]["mean_cost_per_n"].as_f64().unwrap() > 1.0);
    assert!(small_sweep("sync", &[1 << 20], 0.8, 1).is_err());
}
