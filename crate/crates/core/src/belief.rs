//! Hidden pitch type: per-type outcome models, Bayesian belief tracking from
//! observed deliveries, and QMDP action ranking.
//!
//! The pitch type is fixed for the whole chase; only the batting side's
//! belief about it changes.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::doc::{self, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::model::{
    BallOutcome, BattingAction, Bounds, MatchState, RewardSpec, TransitionModel,
};
use crate::sim::{rng_from_seed, sample_outcome};
use crate::solver::{action_values, rank_actions, solve_chase, ActionValue, ValueTable};

/// Weight tolerance for belief normalization.
pub const BELIEF_TOLERANCE: f64 = 1e-12;

/// Default pitch types and the tilt each applies to every row of the
/// default chase model.
pub const DEFAULT_PITCH_TILTS: [(&str, f64); 3] = [("GREEN", 0.8), ("FLAT", 1.0), ("DUSTY", 1.3)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchType {
    pub name: String,
    pub model: TransitionModel,
}

/// The finite set of pitch types the belief ranges over.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchConfig {
    types: Vec<PitchType>,
}

#[derive(Serialize, Deserialize)]
struct PitchConfigDocument {
    schema_version: u32,
    pitch_types: Vec<PitchType>,
}

impl PitchConfig {
    pub fn new(types: Vec<PitchType>) -> Result<Self> {
        if types.len() < 2 {
            return Err(Error::InvalidPitchConfig(format!(
                "need at least two pitch types, got {}",
                types.len()
            )));
        }
        for (i, t) in types.iter().enumerate() {
            if t.name.is_empty() {
                return Err(Error::InvalidPitchConfig("empty pitch type name".into()));
            }
            if types[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::InvalidPitchConfig(format!("duplicate pitch type {:?}", t.name)));
            }
        }
        Ok(Self { types })
    }

    /// Every row of `base` tilted by the per-type factor.
    pub fn from_tilts(base: &TransitionModel, tilts: &[(&str, f64)]) -> Result<Self> {
        let types = tilts
            .iter()
            .map(|&(name, k)| {
                let rows = base.base_rows().tilted(k)?.quantized();
                Ok(PitchType {
                    name: name.to_string(),
                    model: TransitionModel::new(name.to_lowercase(), rows),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(types)
    }

    /// GREEN, FLAT and DUSTY over the default chase model.
    pub fn default_types() -> Self {
        Self::from_tilts(&TransitionModel::default_chase(), &DEFAULT_PITCH_TILTS)
            .expect("default pitch tilts are valid")
    }

    pub fn types(&self) -> &[PitchType] {
        &self.types
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(|t| t.name.as_str())
    }

    pub fn model(&self, name: &str) -> Option<&TransitionModel> {
        self.types.iter().find(|t| t.name == name).map(|t| &t.model)
    }

    pub fn to_document_string(&self) -> Result<String> {
        doc::to_document(&PitchConfigDocument {
            schema_version: SCHEMA_VERSION,
            pitch_types: self.types.clone(),
        })
    }

    pub fn from_document_str(text: &str) -> Result<Self> {
        let d: PitchConfigDocument = doc::from_document(text)?;
        Self::new(d.pitch_types)
    }
}

/// Probability over pitch type names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub weights: BTreeMap<String, f64>,
}

impl Belief {
    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidBelief("no weights".into()));
        }
        if weights.values().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidBelief("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > BELIEF_TOLERANCE {
            return Err(Error::InvalidBelief(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(config: &PitchConfig) -> Self {
        let w = 1.0 / config.types.len() as f64;
        Self {
            weights: config.names().map(|n| (n.to_string(), w)).collect(),
        }
    }

    pub fn point_mass(config: &PitchConfig, name: &str) -> Result<Self> {
        if config.model(name).is_none() {
            return Err(Error::InvalidBelief(format!("unknown pitch type {name:?}")));
        }
        Ok(Self {
            weights: config
                .names()
                .map(|n| (n.to_string(), if n == name { 1.0 } else { 0.0 }))
                .collect(),
        })
    }

    pub fn weight(&self, name: &str) -> f64 {
        self.weights.get(name).copied().unwrap_or(0.0)
    }

    /// Type with the largest weight; ties go to the first name in order.
    pub fn most_likely(&self) -> &str {
        let mut best: Option<(&String, f64)> = None;
        for (n, &w) in &self.weights {
            if best.map_or(true, |(_, b)| w > b) {
                best = Some((n, w));
            }
        }
        best.expect("belief is non-empty").0
    }
}

/// Bayes' rule on aligned weight and likelihood vectors. Returns `None`
/// when every product is zero.
pub fn bayes_reweight(weights: &[f64], likelihoods: &[f64]) -> Option<Vec<f64>> {
    let joint: Vec<f64> = weights.iter().zip(likelihoods).map(|(w, l)| w * l).collect();
    let z: f64 = joint.iter().sum();
    (z > 0.0).then(|| joint.into_iter().map(|j| j / z).collect())
}

/// Posterior over pitch types after seeing `outcome` when playing `action`
/// at `state`. The state only matters for context-refined models.
pub fn update_pitch_belief(
    belief: &Belief,
    config: &PitchConfig,
    state: MatchState,
    action: BattingAction,
    outcome: BallOutcome,
) -> Result<Belief> {
    let mut likelihoods = Vec::with_capacity(belief.weights.len());
    for name in belief.weights.keys() {
        let model = config
            .model(name)
            .ok_or_else(|| Error::InvalidBelief(format!("unknown pitch type {name:?}")))?;
        likelihoods.push(model.row_at(action, state).prob(outcome));
    }
    let prior: Vec<f64> = belief.weights.values().copied().collect();
    let post = bayes_reweight(&prior, &likelihoods).ok_or_else(|| Error::ImpossibleObservation {
        action: action.to_string(),
        outcome: outcome.to_string(),
    })?;
    Ok(Belief {
        weights: belief.weights.keys().cloned().zip(post).collect(),
    })
}

/// Solves the chase once per pitch type.
pub fn solve_pitch_types(
    config: &PitchConfig,
    reward: &RewardSpec,
    bounds: Bounds,
) -> Result<BTreeMap<String, ValueTable>> {
    config
        .types
        .par_iter()
        .map(|t| Ok((t.name.clone(), solve_chase(&t.model, reward, bounds)?.values)))
        .collect()
}

/// QMDP ranking: each action's lookahead value under every pitch type,
/// averaged with the belief weights. Zero-weight types are skipped and need
/// no value table.
pub fn qmdp_recommend(
    belief: &Belief,
    values: &BTreeMap<String, ValueTable>,
    config: &PitchConfig,
    reward: &RewardSpec,
    state: MatchState,
) -> Result<Vec<ActionValue>> {
    let mut q = [0.0; BattingAction::COUNT];
    for (name, &w) in &belief.weights {
        if w == 0.0 {
            continue;
        }
        let table = values
            .get(name)
            .ok_or_else(|| Error::MissingValueTable(name.clone()))?;
        let model = config
            .model(name)
            .ok_or_else(|| Error::InvalidBelief(format!("unknown pitch type {name:?}")))?;
        let per_type = action_values(table, model, reward, state)?;
        for (acc, v) in q.iter_mut().zip(per_type) {
            *acc += w * v;
        }
    }
    Ok(rank_actions(q))
}

/// Draws deliveries from `true_type` at a fixed `state` and `action`,
/// starting from `prior`. Returns the 1-based delivery at which the weight
/// on the true type first reaches `threshold`, or `None` if it does not
/// within `max_balls`.
pub fn balls_to_identify(
    config: &PitchConfig,
    prior: &Belief,
    true_type: &str,
    state: MatchState,
    action: BattingAction,
    threshold: f64,
    max_balls: u32,
    seed: u64,
) -> Result<Option<u32>> {
    let model = config
        .model(true_type)
        .ok_or_else(|| Error::InvalidBelief(format!("unknown pitch type {true_type:?}")))?;
    let row = model.row_at(action, state);
    let mut rng = rng_from_seed(seed);
    let mut belief = prior.clone();
    for ball in 1..=max_balls {
        let outcome = sample_outcome(row, rng.random::<f64>());
        belief = update_pitch_belief(&belief, config, state, action, outcome)?;
        if belief.weight(true_type) >= threshold {
            return Ok(Some(ball));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::balanced_baseline;
    use crate::solver::recommend;

    fn two_type() -> PitchConfig {
        let base = balanced_baseline();
        PitchConfig::new(vec![
            PitchType {
                name: "SLOW".into(),
                model: TransitionModel::single_action(base.tilt(0.5).unwrap().distribution),
            },
            PitchType {
                name: "QUICK".into(),
                model: TransitionModel::single_action(base.tilt(2.0).unwrap().distribution),
            },
        ])
        .unwrap()
    }

    fn live() -> MatchState {
        MatchState::new(20, 12, 3)
    }

    #[test]
    fn default_types_are_valid() {
        let c = PitchConfig::default_types();
        assert_eq!(c.names().collect::<Vec<_>>(), ["GREEN", "FLAT", "DUSTY"]);
        assert_eq!(c.model("FLAT").unwrap().base_rows(), TransitionModel::default_chase().base_rows());
        let text = c.to_document_string().unwrap();
        assert_eq!(PitchConfig::from_document_str(&text).unwrap(), c);
    }

    #[test]
    fn config_needs_two_distinct_types() {
        let one = PitchType {
            name: "A".into(),
            model: TransitionModel::default_chase(),
        };
        assert!(PitchConfig::new(vec![one.clone()]).is_err());
        assert!(PitchConfig::new(vec![one.clone(), one]).is_err());
    }

    #[test]
    fn uninformative_outcome_leaves_belief() {
        let c = two_type();
        let b = Belief::uniform(&c);
        // Singles carry the same probability under both tilts.
        let post = update_pitch_belief(&b, &c, live(), BattingAction::Balanced, BallOutcome::One).unwrap();
        assert_eq!(post, b);
    }

    #[test]
    fn two_to_one_ratio() {
        let post = bayes_reweight(&[0.5, 0.5], &[0.2, 0.1]).unwrap();
        assert!((post[0] - 2.0 / 3.0).abs() < 1e-15 && (post[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(bayes_reweight(&[1.0, 0.0], &[0.0, 0.5]).is_none());
    }

    #[test]
    fn absorbed_belief_stays() {
        let c = two_type();
        let b = Belief::point_mass(&c, "SLOW").unwrap();
        for o in [BallOutcome::Dot, BallOutcome::Four, BallOutcome::Wicket] {
            let post = update_pitch_belief(&b, &c, live(), BattingAction::Balanced, o).unwrap();
            assert_eq!(post.weight("SLOW"), 1.0);
        }
    }

    #[test]
    fn impossible_everywhere_is_an_error() {
        let c = two_type();
        let err = update_pitch_belief(&Belief::uniform(&c), &c, live(), BattingAction::Balanced, BallOutcome::Three)
            .unwrap_err();
        assert!(matches!(err, Error::ImpossibleObservation { .. }));
    }

    #[test]
    fn point_mass_matches_single_type_recommend() {
        let c = PitchConfig::default_types();
        let reward = RewardSpec::default();
        let bounds = Bounds::new(20, 12, 3);
        let tables = solve_pitch_types(&c, &reward, bounds).unwrap();
        let b = Belief::point_mass(&c, "DUSTY").unwrap();
        let only_dusty: BTreeMap<_, _> = [("DUSTY".to_string(), tables["DUSTY"].clone())].into();
        let q = qmdp_recommend(&b, &only_dusty, &c, &reward, live()).unwrap();
        let direct = recommend(&tables["DUSTY"], c.model("DUSTY").unwrap(), &reward, live()).unwrap();
        assert_eq!(q, direct);
    }

    #[test]
    fn missing_table_for_weighted_type() {
        let c = PitchConfig::default_types();
        let err = qmdp_recommend(&Belief::uniform(&c), &BTreeMap::new(), &c, &RewardSpec::default(), live())
            .unwrap_err();
        assert!(matches!(err, Error::MissingValueTable(_)));
    }

    #[test]
    fn identical_models_ignore_belief() {
        let m = TransitionModel::default_chase();
        let c = PitchConfig::new(vec![
            PitchType { name: "A".into(), model: m.clone() },
            PitchType { name: "B".into(), model: m },
        ])
        .unwrap();
        let reward = RewardSpec::default();
        let tables = solve_pitch_types(&c, &reward, Bounds::new(20, 12, 3)).unwrap();
        let order = |w: f64| {
            let b = Belief::new([("A".to_string(), w), ("B".to_string(), 1.0 - w)].into()).unwrap();
            qmdp_recommend(&b, &tables, &c, &reward, live())
                .unwrap()
                .iter()
                .map(|a| a.action)
                .collect::<Vec<_>>()
        };
        assert_eq!(order(0.1), order(0.9));
    }

    #[test]
    fn identification_is_seeded() {
        let c = two_type();
        let prior = Belief::uniform(&c);
        let run = |s| balls_to_identify(&c, &prior, "QUICK", live(), BattingAction::Balanced, 0.95, 200, s).unwrap();
        assert_eq!(run(3), run(3));
        assert!(run(3).is_some());
    }
}
