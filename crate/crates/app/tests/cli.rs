use std::path::Path;
use std::process::{Command, Output};

fn chase(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chase"))
        .current_dir(dir)
        .args(args)
        .env_remove("CHASE_BIND")
        .env_remove("CHASE_PORT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn solve_then_recommend() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("m.doc"),
        chase_core::model::TransitionModel::default_chase()
            .to_document_string()
            .unwrap(),
    )
    .unwrap();
    let o = chase(
        d,
        &[
            "solve",
            "--max-runs",
            "50",
            "--max-balls",
            "30",
            "--max-wickets",
            "5",
            "--model",
            "m.doc",
            "--out",
            "v.doc",
            "--bundle",
            "b.doc",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tables = chase_app::cli::load_tables(&d.join("v.doc")).unwrap();
    assert_eq!(tables.bounds, chase_core::model::Bounds::new(50, 30, 5));

    let o = chase(d, &["recommend", "--state", "0,5,3", "--bundle", "b.doc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("terminal (WIN)"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    let o = chase(d, &["recommend", "--state", "50,30,5", "--bundle", "b.doc"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["actions"].as_array().unwrap().len(), 5);
}

#[test]
fn usage_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = chase(d, &["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));

    let o = chase(d, &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("estimate"));

    let o = chase(d, &["recommend", "--state", "1,2", "--bundle", "b.doc"]);
    assert_eq!(o.status.code(), Some(1));

    let o = chase(d, &["recommend", "--state", "5,5,5", "--bundle", "missing.doc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: "));

    std::fs::write(d.join("bad.doc"), "{\"schema_version\": 7}").unwrap();
    let o = chase(d, &["solve", "--max-runs", "5", "--max-balls", "3", "--max-wickets", "1", "--model", "bad.doc", "--out", "v.doc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bandit_trace_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str| {
        vec!["bandit", "--arms", "0.3,0.5,0.7", "--algo", "ucb1", "--horizon", "10000", "--seed", "7", "--out", out]
    };
    assert_eq!(chase(d, &args("a.csv")).status.code(), Some(0));
    assert_eq!(chase(d, &args("b.csv")).status.code(), Some(0));
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("step,arm,reward,cumulative_pseudo_regret\n"));
    assert_eq!(text.lines().count(), 10_001);
}

#[test]
fn simulate_apply_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = chase(d, &["simulate", "--state", "50,30,5", "--apply", "W"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["next_state"]["wickets_in_hand"], 4);
    assert_eq!(v["next_state"]["balls_remaining"], 29);

    let solve = ["solve", "--max-runs", "20", "--max-balls", "12", "--max-wickets", "3", "--out", "v.doc", "--bundle", "b.doc"];
    assert_eq!(chase(d, &solve).status.code(), Some(0));
    let sim = ["simulate", "--state", "20,12,3", "--bundle", "b.doc", "--episodes", "2000", "--seed", "5", "--trace", "t.txt"];
    let first = chase(d, &sim);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let trace = std::fs::read_to_string(d.join("t.txt")).unwrap();
    assert!(trace.starts_with("20,12,3,"));
    assert_eq!(first.stdout, chase(d, &sim).stdout);
}

#[test]
fn learn_belief_and_transfer_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = chase(d, &["learn", "--algo", "mc", "--max-runs", "6", "--max-balls", "4", "--max-wickets", "1", "--episodes", "20000", "--policy", "BALANCED"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = chase(d, &["learn", "--algo", "sarsa", "--max-runs", "6", "--max-balls", "4", "--max-wickets", "1", "--episodes", "20000", "--out", "q.doc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("q.doc").exists());

    let o = chase(d, &["belief", "pitch", "--state", "20,12,3", "--observations", "AGGRESSIVE:6,BALANCED:W"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);

    let o = chase(d, &["belief", "player", "--player-id", "p", "--prior-mean", "35", "--prior-variance", "100", "--observation-variance", "100", "--scores", "50"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["posterior"]["mean"].as_f64(), Some(42.5));
    assert_eq!(v["posterior"]["variance"].as_f64(), Some(50.0));

    let o = chase(d, &["transfer", "manufacturing", "--units", "12", "--periods", "8", "--machines", "2", "--compare-chase"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["max_gap_vs_chase"].as_f64().unwrap() <= 1e-12);

    std::fs::write(
        d.join("inv.doc"),
        r#"{"schema_version": 1, "inventory": {"min_stock": 0, "max_stock": 4, "max_order": 3,
            "demand_distribution": {"0": 0.3, "1": 0.4, "2": 0.3}, "holding_cost": 1.0,
            "stockout_cost": 5.0, "order_cost": 2.0, "discount": 0.9}}"#,
    )
    .unwrap();
    let o = chase(d, &["transfer", "inventory", "--params", "inv.doc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], true);
    assert_eq!(v["levels"].as_array().unwrap().len(), 5);
}
