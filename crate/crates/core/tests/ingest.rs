use std::collections::BTreeMap;

use chase_core::ingest::{
    ball_by_ball_to_string, classify_naive_bayes, clean_records, estimate_model,
    estimate_outcome_distribution, observations, parse_ball_by_ball_str, train_naive_bayes,
    BallRecord, EstimationConfig, LabeledExample,
};
use chase_core::model::{BattingAction, ContextBucket, MatchState, TransitionModel};
use proptest::prelude::*;
use serde::Deserialize;

const FIXTURE: &str = include_str!("fixtures/ball_by_ball.csv");
const FIXTURE_VALID: &str = include_str!("fixtures/ball_by_ball_valid.csv");

#[derive(Deserialize)]
struct Expect {
    data_rows: usize,
    valid_rows: usize,
    issue_lines: Vec<u64>,
    duplicates: usize,
    imputed_dismissals: usize,
    remapped_fives: usize,
}

fn expect() -> Expect {
    serde_json::from_str(include_str!("fixtures/ball_by_ball_expect.json")).unwrap()
}

#[test]
fn fixture_parses_with_planted_issues() {
    let e = expect();
    assert!(e.data_rows >= 200);
    let (records, issues) = parse_ball_by_ball_str(FIXTURE).unwrap();
    assert_eq!(records.len(), e.valid_rows);
    let lines: Vec<u64> = issues.iter().map(|i| i.line).collect();
    assert_eq!(lines, e.issue_lines);
}

#[test]
fn fixture_round_trips_byte_for_byte() {
    let (records, _) = parse_ball_by_ball_str(FIXTURE).unwrap();
    assert_eq!(ball_by_ball_to_string(&records).unwrap(), FIXTURE_VALID);
}

#[test]
fn fixture_cleaning_counts_and_idempotence() {
    let e = expect();
    let (records, _) = parse_ball_by_ball_str(FIXTURE).unwrap();
    let (clean, report) = clean_records(&records);
    assert_eq!(report.duplicates, e.duplicates);
    assert_eq!(report.imputed_dismissals, e.imputed_dismissals);
    assert_eq!(report.remapped_fives, e.remapped_fives);
    assert_eq!(clean.len(), e.valid_rows - e.duplicates);
    let (twice, second) = clean_records(&clean);
    assert_eq!(twice, clean);
    assert!(second.is_clean());
}

#[test]
fn fixture_estimates_are_valid_and_positive() {
    let (records, _) = parse_ball_by_ball_str(FIXTURE).unwrap();
    let (clean, _) = clean_records(&records);
    let obs = observations(&clean, 120);
    let cfg = EstimationConfig::default();
    for bucket in ContextBucket::all() {
        let est = estimate_outcome_distribution(&obs, bucket, &cfg).unwrap();
        let p = est.distribution.probs();
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(p.iter().all(|&x| x > 0.0));
    }
}

#[test]
fn estimated_model_survives_a_document_round_trip() {
    let (records, _) = parse_ball_by_ball_str(FIXTURE).unwrap();
    let (clean, _) = clean_records(&records);
    let model = estimate_model(&clean, &EstimationConfig::default(), 120, 10).unwrap();
    assert!(!model.contexts().unwrap().overrides.is_empty());
    let text = model.to_document_string().unwrap();
    let back = TransitionModel::from_document_str(&text).unwrap();
    assert_eq!(back, model);
    // Aggression ordering holds in the base rows.
    let boundary = |a: BattingAction| model.row(a).boundary_mass();
    assert!(boundary(BattingAction::UltraDefensive) < boundary(BattingAction::UltraAggressive));
    let _ = model.row_at(BattingAction::Balanced, MatchState::new(40, 30, 4));
}

/// Posterior by summing a brute-force joint table built from raw counts.
#[test]
fn naive_bayes_matches_joint_table() {
    let data = [
        ("attack", "DEATH", "HIGH"),
        ("attack", "DEATH", "LOW"),
        ("attack", "MIDDLE", "HIGH"),
        ("defend", "MIDDLE", "LOW"),
        ("defend", "DEATH", "LOW"),
        ("defend", "MIDDLE", "LOW"),
        ("defend", "MIDDLE", "HIGH"),
    ];
    let examples: Vec<LabeledExample> = data
        .iter()
        .map(|&(c, p, r)| LabeledExample::new(c, [("phase", p), ("rate", r)]))
        .collect();
    let model = train_naive_bayes(&examples, 0.0).unwrap();
    let count = |pred: &dyn Fn(&(&str, &str, &str)) -> bool| data.iter().filter(|d| pred(d)).count() as f64;
    for (phase, rate) in [("DEATH", "HIGH"), ("MIDDLE", "LOW"), ("DEATH", "LOW")] {
        let mut joint = BTreeMap::new();
        for class in ["attack", "defend"] {
            let n_c = count(&|d| d.0 == class);
            let p_phase = count(&|d| d.0 == class && d.1 == phase) / n_c;
            let p_rate = count(&|d| d.0 == class && d.2 == rate) / n_c;
            joint.insert(class, n_c / data.len() as f64 * p_phase * p_rate);
        }
        let z: f64 = joint.values().sum();
        let feats: BTreeMap<String, String> =
            [("phase".to_string(), phase.to_string()), ("rate".to_string(), rate.to_string())]
                .into();
        let post = classify_naive_bayes(&model, &feats);
        for (class, j) in joint {
            assert!((post[class] - j / z).abs() <= 1e-12, "{phase}/{rate}/{class}");
        }
        assert!((post.values().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn naive_bayes_symmetric_tables_give_uniform_posterior() {
    let examples = vec![
        LabeledExample::new("a", [("f", "x")]),
        LabeledExample::new("a", [("f", "y")]),
        LabeledExample::new("b", [("f", "x")]),
        LabeledExample::new("b", [("f", "y")]),
    ];
    let model = train_naive_bayes(&examples, 1.0).unwrap();
    let post = classify_naive_bayes(&model, &[("f".to_string(), "x".to_string())].into());
    assert!((post["a"] - 0.5).abs() <= 1e-15);
}

fn arb_record() -> impl Strategy<Value = BallRecord> {
    (
        prop::sample::select(vec!["M1", "M2"]),
        1u8..=2,
        0u32..3,
        1u8..=6,
        0u8..=6,
        0u32..2,
        any::<bool>(),
        prop::option::of(prop::sample::select(vec!["caught", "bowled"])),
    )
        .prop_map(|(m, inn, over, ball, runs, extras, wicket, dismissal)| BallRecord {
            match_id: m.to_string(),
            innings: inn,
            over,
            ball_in_over: ball,
            batter_id: "b".into(),
            bowler_id: "k".into(),
            runs_batter: runs,
            extras,
            wicket,
            dismissal_type: dismissal.map(str::to_string),
        })
}

proptest! {
    #[test]
    fn cleaning_is_idempotent(records in prop::collection::vec(arb_record(), 0..60)) {
        let (once, _) = clean_records(&records);
        let (twice, report) = clean_records(&once);
        prop_assert_eq!(twice, once);
        prop_assert!(report.is_clean());
    }

    #[test]
    fn serialized_records_reparse_identically(records in prop::collection::vec(arb_record(), 0..40)) {
        let text = ball_by_ball_to_string(&records).unwrap();
        let (back, issues) = parse_ball_by_ball_str(&text).unwrap();
        prop_assert!(issues.is_empty());
        prop_assert_eq!(back, records);
    }

    #[test]
    fn smoothed_estimates_are_strictly_positive(
        records in prop::collection::vec(arb_record(), 0..80),
        alpha in 0.01f64..5.0,
        min_samples in 0usize..20,
    ) {
        let obs = observations(&records, 120);
        let cfg = EstimationConfig { smoothing_alpha: alpha, min_samples };
        for bucket in ContextBucket::all() {
            let p = *estimate_outcome_distribution(&obs, bucket, &cfg).unwrap().distribution.probs();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn scaling_one_feature_leaves_posterior_unchanged(scale in 0.01f64..100.0) {
        let examples = vec![
            LabeledExample::new("a", [("f", "x"), ("g", "p")]),
            LabeledExample::new("a", [("f", "y"), ("g", "p")]),
            LabeledExample::new("b", [("f", "x"), ("g", "q")]),
            LabeledExample::new("c", [("f", "y"), ("g", "q")]),
        ];
        let model = train_naive_bayes(&examples, 1.0).unwrap();
        let mut scaled = model.clone();
        for row in scaled.conditionals.get_mut("f").unwrap().values_mut() {
            for p in row.values_mut() {
                *p *= scale;
            }
        }
        for u in scaled.unseen.get_mut("f").unwrap().values_mut() {
            *u *= scale;
        }
        let feats: BTreeMap<String, String> =
            [("f".to_string(), "x".to_string()), ("g".to_string(), "q".to_string())].into();
        let a = classify_naive_bayes(&model, &feats);
        let b = classify_naive_bayes(&scaled, &feats);
        for (k, v) in a {
            prop_assert!((b[&k] - v).abs() <= 1e-12);
        }
    }
}
