//! Request and response bodies for the decision-support endpoints, and the
//! pure functions that answer them. The HTTP layer and the CLI both call
//! these, so every service answer can be reproduced from the command line.
//!
//! Bodies are JSON with snake_case fields and a `schema_version`. Numbers
//! are written in shortest round-trip form so clients read back the exact
//! doubles the library computed.

use std::collections::BTreeMap;
use std::sync::Arc;

use chase_core::doc::SCHEMA_VERSION;
use chase_core::model::{BallOutcome, BattingAction, Bounds, MatchState, RewardSpec, TerminalStatus};
use chase_core::sim::estimate_win_probability;
use chase_core::solver::{recommend, ActionValue};
use chase_core::Error as CoreError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bundle::ModelBundle;

/// Upper limit on episodes per simulate request.
pub const MAX_SIMULATION_EPISODES: u64 = 10_000_000;

/// Immutable set of loaded bundles keyed by id.
#[derive(Debug, Clone, Default)]
pub struct BundleSet {
    bundles: BTreeMap<String, Arc<ModelBundle>>,
}

impl BundleSet {
    pub fn new(bundles: impl IntoIterator<Item = ModelBundle>) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for b in bundles {
            let id = b.bundle_id.clone();
            if map.insert(id.clone(), Arc::new(b)).is_some() {
                return Err(format!("bundle id {id:?} loaded twice"));
            }
        }
        Ok(Self { bundles: map })
    }

    pub fn get(&self, id: &str) -> Result<&ModelBundle, ApiError> {
        self.bundles.get(id).map(Arc::as_ref).ok_or_else(|| ApiError {
            status: 404,
            code: "unknown_bundle",
            message: format!("no bundle with id {id:?}"),
            terminal_status: None,
        })
    }

    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModelBundle> {
        self.bundles.values().map(Arc::as_ref)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal_status: Option<TerminalStatus>,
}

impl ApiError {
    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: 400,
            code,
            message: message.into(),
            terminal_status: None,
        }
    }

    fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: 422,
            code,
            message: message.into(),
            terminal_status: None,
        }
    }

    pub fn body(&self) -> ErrorBody<'_> {
        ErrorBody {
            schema_version: SCHEMA_VERSION,
            error: self,
        }
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::TerminalState { status, .. } => Self {
                status: 422,
                code: "terminal_state",
                message: e.to_string(),
                terminal_status: Some(status),
            },
            CoreError::OutOfBounds { .. } => Self::unprocessable("out_of_bounds", e.to_string()),
            CoreError::InvalidParams(_) => Self::unprocessable("invalid_parameters", e.to_string()),
            other => Self {
                status: 500,
                code: "internal",
                message: other.to_string(),
                terminal_status: None,
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBody<'a> {
    pub schema_version: u32,
    pub error: &'a ApiError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRequest {
    pub schema_version: u32,
    pub bundle_id: String,
    pub state: MatchState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRequest {
    pub schema_version: u32,
    pub bundle_id: String,
    pub state: MatchState,
    pub episodes: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyOutcomeRequest {
    pub schema_version: u32,
    pub state: MatchState,
    pub outcome: BallOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSummary {
    pub bundle_id: String,
    pub model_sha256: String,
    pub bounds: Bounds,
    pub reward_spec: RewardSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleListResponse {
    pub schema_version: u32,
    pub bundles: Vec<BundleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub schema_version: u32,
    pub bundle_id: String,
    pub state: MatchState,
    /// Optimal value of `state` from the bundle's table.
    pub win_probability: f64,
    pub recommended: BattingAction,
    /// Best first; ties keep aggression order.
    pub actions: Vec<ActionValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeBranch {
    pub outcome: BallOutcome,
    pub probability: f64,
    pub next_state: MatchState,
    pub successor_value: f64,
    pub step_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionWhatIf {
    pub action: BattingAction,
    /// Σ probability × (successor_value − step_penalty) over `outcomes`.
    pub value: f64,
    pub outcomes: Vec<OutcomeBranch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub schema_version: u32,
    pub bundle_id: String,
    pub state: MatchState,
    /// Same order as the recommend ranking.
    pub per_action: Vec<ActionWhatIf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResponse {
    pub schema_version: u32,
    pub bundle_id: String,
    pub state: MatchState,
    pub episodes: u64,
    pub seed: u64,
    pub wins: u64,
    pub win_rate: f64,
    pub standard_error: f64,
    /// Exact value of the bundle policy at `state`, for comparison.
    pub exact_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyOutcomeResponse {
    pub schema_version: u32,
    pub state: MatchState,
    pub outcome: BallOutcome,
    pub next_state: MatchState,
    pub terminal_status: TerminalStatus,
}

/// Parses a request body and checks its schema version.
pub fn parse_body<T: DeserializeOwned + HasVersion>(body: &[u8]) -> Result<T, ApiError> {
    let req: T = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request("malformed_body", e.to_string()))?;
    if req.version() != SCHEMA_VERSION {
        return Err(ApiError::bad_request(
            "unsupported_schema_version",
            format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", req.version()),
        ));
    }
    Ok(req)
}

pub trait HasVersion {
    fn version(&self) -> u32;
}

macro_rules! has_version {
    ($($t:ty),*) => {$(
        impl HasVersion for $t {
            fn version(&self) -> u32 {
                self.schema_version
            }
        }
    )*};
}
has_version!(StateRequest, SimulateRequest, ApplyOutcomeRequest);

pub fn list_bundles(set: &BundleSet) -> BundleListResponse {
    BundleListResponse {
        schema_version: SCHEMA_VERSION,
        bundles: set
            .iter()
            .map(|b| BundleSummary {
                bundle_id: b.bundle_id.clone(),
                model_sha256: b.model_sha256.clone(),
                bounds: b.bounds(),
                reward_spec: b.reward,
            })
            .collect(),
    }
}

fn live_state(state: MatchState) -> Result<(), ApiError> {
    if state.is_terminal() {
        let status = state.status();
        return Err(CoreError::TerminalState { state, status }.into());
    }
    Ok(())
}

pub fn recommend_state(bundle: &ModelBundle, state: MatchState) -> Result<RecommendResponse, ApiError> {
    live_state(state)?;
    let actions = recommend(&bundle.values, &bundle.model, &bundle.reward, state)?;
    Ok(RecommendResponse {
        schema_version: SCHEMA_VERSION,
        bundle_id: bundle.bundle_id.clone(),
        state,
        win_probability: bundle.values.value(state)?,
        recommended: actions[0].action,
        actions,
    })
}

/// Per-action outcome breakdown. Action values are taken from the same
/// ranking `recommend_state` returns, so the two always agree exactly.
pub fn what_if(bundle: &ModelBundle, state: MatchState) -> Result<WhatIfResponse, ApiError> {
    live_state(state)?;
    let ranked = recommend(&bundle.values, &bundle.model, &bundle.reward, state)?;
    let mut per_action = Vec::with_capacity(ranked.len());
    for av in ranked {
        let mut outcomes = Vec::new();
        for (outcome, probability) in bundle.model.row_at(av.action, state).iter() {
            if probability == 0.0 {
                continue;
            }
            let next_state = state.apply(outcome)?;
            outcomes.push(OutcomeBranch {
                outcome,
                probability,
                next_state,
                successor_value: bundle.values.value(next_state)?,
                step_penalty: bundle.reward.step_penalty(outcome),
            });
        }
        per_action.push(ActionWhatIf {
            action: av.action,
            value: av.value,
            outcomes,
        });
    }
    Ok(WhatIfResponse {
        schema_version: SCHEMA_VERSION,
        bundle_id: bundle.bundle_id.clone(),
        state,
        per_action,
    })
}

pub fn simulate(bundle: &ModelBundle, state: MatchState, episodes: u64, seed: u64) -> Result<SimulateResponse, ApiError> {
    live_state(state)?;
    if episodes == 0 || episodes > MAX_SIMULATION_EPISODES {
        return Err(ApiError::unprocessable(
            "invalid_parameters",
            format!("episodes must lie in 1..={MAX_SIMULATION_EPISODES}, got {episodes}"),
        ));
    }
    let exact_value = bundle.values.value(state)?;
    let summary = estimate_win_probability(state, &bundle.policy, &bundle.model, episodes, seed)?;
    Ok(SimulateResponse {
        schema_version: SCHEMA_VERSION,
        bundle_id: bundle.bundle_id.clone(),
        state,
        episodes,
        seed,
        wins: summary.wins,
        win_rate: summary.win_rate,
        standard_error: summary.standard_error,
        exact_value,
    })
}

pub fn apply_outcome(state: MatchState, outcome: BallOutcome) -> Result<ApplyOutcomeResponse, ApiError> {
    let next_state = state.apply(outcome)?;
    Ok(ApplyOutcomeResponse {
        schema_version: SCHEMA_VERSION,
        state,
        outcome,
        next_state,
        terminal_status: next_state.status(),
    })
}

/// Canonical body text: pretty JSON plus a trailing newline.
pub fn to_body<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("bodies serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use chase_core::model::TransitionModel;

    fn bundle() -> ModelBundle {
        ModelBundle::solve(Some("t".into()), &TransitionModel::default_chase(), RewardSpec::default(), Bounds::new(20, 12, 3))
            .unwrap()
    }

    #[test]
    fn what_if_values_equal_recommend() {
        let b = bundle();
        let s = MatchState::new(20, 12, 3);
        let r = recommend_state(&b, s).unwrap();
        let w = what_if(&b, s).unwrap();
        for (a, x) in r.actions.iter().zip(&w.per_action) {
            assert_eq!(a.action, x.action);
            assert_eq!(a.value, x.value);
        }
    }

    #[test]
    fn terminal_recommend_is_422_with_status() {
        let err = recommend_state(&bundle(), MatchState::new(0, 5, 3)).unwrap_err();
        assert_eq!(err.status, 422);
        assert_eq!(err.terminal_status, Some(TerminalStatus::Win));
        assert!(err.message.contains("terminal (WIN)"));
    }

    #[test]
    fn wicket_step() {
        let r = apply_outcome(MatchState::new(50, 30, 5), BallOutcome::Wicket).unwrap();
        assert_eq!(r.next_state, MatchState::new(50, 29, 4));
        assert_eq!(r.terminal_status, TerminalStatus::NonTerminal);
    }

    #[test]
    fn body_errors() {
        let e = parse_body::<StateRequest>(b"{\"schema_version\":1}").unwrap_err();
        assert_eq!((e.status, e.code), (400, "malformed_body"));
        let e = parse_body::<StateRequest>(
            br#"{"schema_version":2,"bundle_id":"t","state":{"runs_needed":1,"balls_remaining":1,"wickets_in_hand":1}}"#,
        )
        .unwrap_err();
        assert_eq!(e.code, "unsupported_schema_version");
        let set = BundleSet::new([bundle()]).unwrap();
        assert_eq!(set.get("nope").unwrap_err().status, 404);
    }
}
