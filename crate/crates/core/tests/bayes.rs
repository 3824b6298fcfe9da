use chase_core::bayes::{
    credible_interval, posterior_predictive, update_belief, update_belief_batch,
    update_belief_fold, NormalBelief, ObservationModel,
};
use proptest::prelude::*;

/// Precision-weighted closed form, written independently of the gain form.
fn precision_form(m0: f64, v0: f64, scores: &[f64], s2: f64) -> (f64, f64) {
    let prec = 1.0 / v0 + scores.len() as f64 / s2;
    let mean = (m0 / v0 + scores.iter().sum::<f64>() / s2) / prec;
    (mean, 1.0 / prec)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn three_scores_fold_equals_closed_form() {
    let prior = NormalBelief::new(35.0, 100.0).unwrap();
    let obs = ObservationModel::new(225.0).unwrap();
    let scores = [40.0, 45.0, 50.0];
    let fold = update_belief_fold(prior, &scores, &obs);
    let batch = update_belief_batch(prior, &scores, &obs);
    let (m, v) = precision_form(35.0, 100.0, &scores, 225.0);
    for b in [fold, batch] {
        assert!((b.mean - m).abs() <= 1e-12 && (b.variance - v).abs() <= 1e-12);
    }
}

#[test]
fn batch_edge_cases() {
    let prior = NormalBelief::new(35.0, 100.0).unwrap();
    let obs = ObservationModel::default();
    assert_eq!(update_belief_batch(prior, &[], &obs), prior);
    assert_eq!(update_belief_batch(prior, &[50.0], &obs), update_belief(prior, 50.0, &obs));
}

#[test]
fn intervals_are_centred_and_nested() {
    let b = NormalBelief::new(42.5, 50.0).unwrap();
    let mut last = 0.0;
    for mass in [0.1, 0.5, 0.8, 0.9, 0.95, 0.99, 0.999] {
        let (lo, hi) = credible_interval(b, mass).unwrap();
        assert!(((lo + hi) / 2.0 - 42.5).abs() < 1e-12);
        assert!(hi - lo > last);
        last = hi - lo;
    }
}

proptest! {
    #[test]
    fn each_update_contracts_and_moves_between(
        m0 in -50.0f64..150.0,
        v0 in 1e-3f64..1e4,
        s2 in 1e-3f64..1e4,
        gap in prop::sample::select(vec![-40.0, -3.0, -0.5, 0.5, 7.0, 60.0]),
    ) {
        let prior = NormalBelief::new(m0, v0).unwrap();
        let x = m0 + gap;
        let post = update_belief(prior, x, &ObservationModel::new(s2).unwrap());
        prop_assert!(post.variance < prior.variance);
        prop_assert!(post.variance > 0.0);
        let (lo, hi) = if x < m0 { (x, m0) } else { (m0, x) };
        prop_assert!(post.mean > lo && post.mean < hi);
        let (pm, pv) = posterior_predictive(post, &ObservationModel::new(s2).unwrap());
        prop_assert_eq!(pm, post.mean);
        prop_assert!(pv > post.variance);
    }

    #[test]
    fn batch_matches_fold_and_ignores_order(
        scores in prop::collection::vec(0.0f64..120.0, 0..25),
        m0 in 0.0f64..80.0,
        v0 in 1.0f64..400.0,
        s2 in 1.0f64..900.0,
        rot in 0usize..25,
    ) {
        let prior = NormalBelief::new(m0, v0).unwrap();
        let obs = ObservationModel::new(s2).unwrap();
        let fold = update_belief_fold(prior, &scores, &obs);
        let batch = update_belief_batch(prior, &scores, &obs);
        let (m, v) = precision_form(m0, v0, &scores, s2);
        prop_assert!(close(fold.mean, m, 1e-12) && close(fold.variance, v, 1e-12));
        prop_assert!(close(batch.mean, m, 1e-12) && close(batch.variance, v, 1e-12));
        let mut permuted = scores.clone();
        if !permuted.is_empty() {
            let k = rot % permuted.len();
            permuted.rotate_left(k);
            permuted.reverse();
        }
        let p = update_belief_batch(prior, &permuted, &obs);
        prop_assert!(close(p.mean, batch.mean, 1e-12) && close(p.variance, batch.variance, 1e-12));
    }
}
