use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: BTreeMap<String, String>,
    pub class: String,
}

impl LabeledExample {
    pub fn new<'a>(class: &str, features: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            features: features
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            class: class.to_string(),
        }
    }
}

/// Categorical Naive Bayes with additive smoothing.
///
/// `conditionals[feature][class][value]` is P(value | class). With
/// `alpha > 0` each row also reserves `unseen[feature][class]` for values
/// never observed in training, and the row including that slot sums to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub alpha: f64,
    pub class_priors: BTreeMap<String, f64>,
    pub conditionals: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
    pub unseen: BTreeMap<String, BTreeMap<String, f64>>,
}

pub fn train_naive_bayes(examples: &[LabeledExample], alpha: f64) -> Result<NaiveBayesModel> {
    if examples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParams(format!(
            "smoothing alpha must be a finite value >= 0, got {alpha}"
        )));
    }
    let mut class_counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut values: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    // feature -> class -> value -> count
    let mut counts: BTreeMap<&str, BTreeMap<&str, BTreeMap<&str, usize>>> = BTreeMap::new();
    for ex in examples {
        *class_counts.entry(&ex.class).or_default() += 1;
        for (f, v) in &ex.features {
            values.entry(f).or_default().insert(v);
            *counts
                .entry(f)
                .or_default()
                .entry(&ex.class)
                .or_default()
                .entry(v)
                .or_default() += 1;
        }
    }
    let total = examples.len() as f64;
    let class_priors = class_counts
        .iter()
        .map(|(c, &n)| (c.to_string(), n as f64 / total))
        .collect();

    let slots = |f: &str| values[f].len() + usize::from(alpha > 0.0);
    let mut conditionals = BTreeMap::new();
    let mut unseen = BTreeMap::new();
    for (&f, vals) in &values {
        let mut by_class = BTreeMap::new();
        let mut unseen_by_class = BTreeMap::new();
        for &c in class_counts.keys() {
            let row = counts.get(f).and_then(|m| m.get(c));
            // Examples of class c that carry feature f at all.
            let n: usize = row.map_or(0, |r| r.values().sum());
            let denom = n as f64 + alpha * slots(f) as f64;
            let mut probs = BTreeMap::new();
            for &v in vals {
                let k = row.and_then(|r| r.get(v)).copied().unwrap_or(0) as f64;
                let p = if denom > 0.0 { (k + alpha) / denom } else { 1.0 / vals.len() as f64 };
                probs.insert(v.to_string(), p);
            }
            if alpha > 0.0 {
                unseen_by_class.insert(c.to_string(), alpha / denom);
            }
            by_class.insert(c.to_string(), probs);
        }
        conditionals.insert(f.to_string(), by_class);
        if alpha > 0.0 {
            unseen.insert(f.to_string(), unseen_by_class);
        }
    }
    Ok(NaiveBayesModel {
        alpha,
        class_priors,
        conditionals,
        unseen,
    })
}

/// Class posteriors for one feature assignment, summing to 1.
///
/// Unknown feature names are skipped. A value unseen in training uses the
/// smoothing mass; without smoothing it is uninformative for every class
/// and skipped. Should the evidence rule out every class, the priors are
/// returned.
pub fn classify_naive_bayes(
    model: &NaiveBayesModel,
    features: &BTreeMap<String, String>,
) -> BTreeMap<String, f64> {
    let mut log_post: BTreeMap<&str, f64> = model
        .class_priors
        .iter()
        .map(|(c, &p)| (c.as_str(), p.ln()))
        .collect();
    for (f, v) in features {
        let Some(by_class) = model.conditionals.get(f) else {
            log::warn!("feature {f:?} unknown to the model; ignored");
            continue;
        };
        let likelihood = |c: &str| -> f64 {
            by_class
                .get(c)
                .and_then(|row| row.get(v))
                .copied()
                .or_else(|| model.unseen.get(f).and_then(|u| u.get(c)).copied())
                .unwrap_or(0.0)
        };
        if model.class_priors.keys().all(|c| likelihood(c) == 0.0) {
            continue;
        }
        for (c, lp) in log_post.iter_mut() {
            *lp += likelihood(c).ln();
        }
    }
    let max = log_post.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        log::warn!("evidence rules out every class; returning priors");
        return model.class_priors.clone();
    }
    let weights: Vec<(&str, f64)> = log_post.iter().map(|(c, lp)| (*c, (lp - max).exp())).collect();
    let z: f64 = weights.iter().map(|(_, w)| w).sum();
    weights.into_iter().map(|(c, w)| (c.to_string(), w / z)).collect()
}
