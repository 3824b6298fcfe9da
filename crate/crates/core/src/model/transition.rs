use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BallOutcome, BattingAction, ContextBucket, MatchState, OutcomeDistribution};
use crate::doc::{self, SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Aggression factors applied to the balanced baseline to generate the
/// default ULTRA_DEFENSIVE, DEFENSIVE and ULTRA_AGGRESSIVE rows.
pub const DEFAULT_TILTS: [(BattingAction, f64); 3] = [
    (BattingAction::UltraDefensive, 0.5),
    (BattingAction::Defensive, 0.75),
    (BattingAction::UltraAggressive, 1.5),
];

/// Tilt used for AGGRESSIVE when every row is derived from one estimated
/// baseline (the default model uses the explicit aggressive row instead).
const DERIVED_AGGRESSIVE_TILT: f64 = 1.25;

/// Typical delivery mix: 40% dots, 30% singles, 20% boundaries (split 3:1
/// between fours and sixes), 10% wickets.
pub fn balanced_baseline() -> OutcomeDistribution {
    OutcomeDistribution::from_pairs(&[
        (BallOutcome::Dot, 0.40),
        (BallOutcome::One, 0.30),
        (BallOutcome::Four, 0.15),
        (BallOutcome::Six, 0.05),
        (BallOutcome::Wicket, 0.10),
    ])
    .expect("baseline sums to one")
}

/// Aggressive batting needing 50 off 30: {6:.05, 4:.15, 2:.20, 1:.25,
/// 0:.25, W:.10}; no threes.
pub fn reference_aggressive_row() -> OutcomeDistribution {
    OutcomeDistribution::from_pairs(&[
        (BallOutcome::Six, 0.05),
        (BallOutcome::Four, 0.15),
        (BallOutcome::Two, 0.20),
        (BallOutcome::One, 0.25),
        (BallOutcome::Dot, 0.25),
        (BallOutcome::Wicket, 0.10),
    ])
    .expect("aggressive row sums to one")
}

/// One outcome distribution per batting action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionRows([OutcomeDistribution; BattingAction::COUNT]);

impl ActionRows {
    pub fn new(rows: [OutcomeDistribution; BattingAction::COUNT]) -> Self {
        Self(rows)
    }

    /// Same row for every action.
    pub fn uniform(row: OutcomeDistribution) -> Self {
        Self([row; BattingAction::COUNT])
    }

    /// Derives all five rows from one baseline by tilting (0.5, 0.75, 1,
    /// 1.25, 1.5).
    pub fn from_baseline(base: &OutcomeDistribution) -> Result<Self> {
        let mut rows = [*base; BattingAction::COUNT];
        for (action, k) in DEFAULT_TILTS {
            rows[action.index()] = base.tilt(k)?.distribution;
        }
        rows[BattingAction::Aggressive.index()] = base.tilt(DERIVED_AGGRESSIVE_TILT)?.distribution;
        Ok(Self(rows))
    }

    pub fn get(&self, action: BattingAction) -> &OutcomeDistribution {
        &self.0[action.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (BattingAction, &OutcomeDistribution)> {
        BattingAction::ALL.into_iter().zip(self.0.iter())
    }

    /// Applies the same tilt to every row.
    pub fn tilted(&self, aggression: f64) -> Result<Self> {
        let mut rows = self.0;
        for row in rows.iter_mut() {
            *row = row.tilt(aggression)?.distribution;
        }
        Ok(Self(rows))
    }

    pub fn quantized(&self) -> Self {
        Self(self.0.map(|r| r.quantized()))
    }

    fn from_raw(raw: &BTreeMap<String, BTreeMap<String, f64>>, context: &str) -> Result<Self> {
        let mut rows: [Option<OutcomeDistribution>; BattingAction::COUNT] = [None; 5];
        for (name, fields) in raw {
            let action: BattingAction = name.parse().map_err(|e: String| {
                Error::InvalidDistribution {
                    context: context.to_string(),
                    reason: e,
                }
            })?;
            let label = format!("context {context}, action {action}");
            rows[action.index()] = Some(OutcomeDistribution::from_named(fields, &label)?);
        }
        let mut out = [OutcomeDistribution::point_mass(BallOutcome::Dot); BattingAction::COUNT];
        for (i, row) in rows.into_iter().enumerate() {
            out[i] = row.ok_or_else(|| Error::InvalidDistribution {
                context: format!("context {context}, action {}", BattingAction::ALL[i]),
                reason: "row missing".to_string(),
            })?;
        }
        Ok(Self(out))
    }
}

impl Serialize for ActionRows {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(BattingAction::COUNT))?;
        for (action, row) in self.iter() {
            map.serialize_entry(action.name(), row)?;
        }
        map.end()
    }
}

/// Per-bucket rows replacing the base rows inside matching game situations.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextTable {
    /// Legal deliveries in a full innings (120 for T20).
    pub innings_balls: u32,
    /// Wickets available at the start of the innings.
    pub squad_wickets: u32,
    pub overrides: BTreeMap<ContextBucket, ActionRows>,
}

/// Outcome model for every batting action, optionally refined per context
/// bucket. Rows are state-independent within a bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    context_key: String,
    rows: ActionRows,
    contexts: Option<ContextTable>,
}

impl TransitionModel {
    pub fn new(context_key: impl Into<String>, rows: ActionRows) -> Self {
        Self {
            context_key: context_key.into(),
            rows,
            contexts: None,
        }
    }

    /// BALANCED from the baseline mix, AGGRESSIVE from the explicit
    /// aggressive row, the remaining three tilted from BALANCED.
    pub fn default_chase() -> Self {
        let base = balanced_baseline();
        let mut rows = [base; BattingAction::COUNT];
        for (action, k) in DEFAULT_TILTS {
            rows[action.index()] = base.tilt(k).expect("default tilts are in range").distribution;
        }
        rows[BattingAction::Aggressive.index()] = reference_aggressive_row();
        Self::new("default", ActionRows::new(rows).quantized())
    }

    /// Every action plays the same row.
    pub fn single_action(row: OutcomeDistribution) -> Self {
        Self::new("single-action", ActionRows::uniform(row))
    }

    pub fn with_contexts(mut self, table: ContextTable) -> Self {
        self.contexts = Some(table);
        self
    }

    pub fn context_key(&self) -> &str {
        &self.context_key
    }

    pub fn base_rows(&self) -> &ActionRows {
        &self.rows
    }

    pub fn contexts(&self) -> Option<&ContextTable> {
        self.contexts.as_ref()
    }

    pub fn row(&self, action: BattingAction) -> &OutcomeDistribution {
        self.rows.get(action)
    }

    /// Rows in force at `state`: the bucket override when one exists,
    /// otherwise the base rows.
    pub fn rows_at(&self, state: MatchState) -> &ActionRows {
        match &self.contexts {
            Some(table) if !table.overrides.is_empty() => {
                let bucket =
                    ContextBucket::for_state(state, table.innings_balls, table.squad_wickets);
                table.overrides.get(&bucket).unwrap_or(&self.rows)
            }
            _ => &self.rows,
        }
    }

    pub fn row_at(&self, action: BattingAction, state: MatchState) -> &OutcomeDistribution {
        self.rows_at(state).get(action)
    }

    /// Every row snapped onto the 1e-12 grid; the result survives a
    /// document round trip bit-for-bit.
    pub fn quantized(&self) -> Self {
        Self {
            context_key: self.context_key.clone(),
            rows: self.rows.quantized(),
            contexts: self.contexts.as_ref().map(|t| ContextTable {
                innings_balls: t.innings_balls,
                squad_wickets: t.squad_wickets,
                overrides: t.overrides.iter().map(|(k, v)| (*k, v.quantized())).collect(),
            }),
        }
    }

    pub fn to_document(&self) -> TransitionModelDocument {
        TransitionModelDocument {
            schema_version: SCHEMA_VERSION,
            context_key: self.context_key.clone(),
            rows: self.rows,
            innings_balls: self.contexts.as_ref().map(|t| t.innings_balls),
            squad_wickets: self.contexts.as_ref().map(|t| t.squad_wickets),
            contexts: self
                .contexts
                .as_ref()
                .map(|t| {
                    t.overrides
                        .iter()
                        .map(|(bucket, rows)| ContextSection {
                            context_key: bucket.key(),
                            rows: *rows,
                        })
                        .collect()
                })
                .unwrap_or_default(),
        }
    }

    pub fn to_document_string(&self) -> Result<String> {
        doc::to_document(&self.to_document())
    }

    pub fn from_document_str(text: &str) -> Result<Self> {
        let raw: RawModelDocument = doc::from_document(text)?;
        let rows = ActionRows::from_raw(&raw.rows, &raw.context_key)?;
        let mut model = Self::new(raw.context_key, rows);
        if !raw.contexts.is_empty() {
            let mut overrides = BTreeMap::new();
            for section in &raw.contexts {
                let bucket: ContextBucket =
                    section
                        .context_key
                        .parse()
                        .map_err(|reason| Error::InvalidDistribution {
                            context: section.context_key.clone(),
                            reason,
                        })?;
                overrides.insert(bucket, ActionRows::from_raw(&section.rows, &section.context_key)?);
            }
            model = model.with_contexts(ContextTable {
                innings_balls: raw.innings_balls.unwrap_or(120),
                squad_wickets: raw.squad_wickets.unwrap_or(10),
                overrides,
            });
        }
        Ok(model)
    }

    /// SHA-256 of the canonical document text, used to link solved tables
    /// to the exact model they came from.
    pub fn fingerprint(&self) -> Result<String> {
        let text = self.to_document_string()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionModelDocument {
    pub schema_version: u32,
    pub context_key: String,
    pub rows: ActionRows,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub innings_balls: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub squad_wickets: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub contexts: Vec<ContextSection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContextSection {
    pub context_key: String,
    pub rows: ActionRows,
}

#[derive(Deserialize)]
struct RawModelDocument {
    context_key: String,
    rows: BTreeMap<String, BTreeMap<String, f64>>,
    innings_balls: Option<u32>,
    squad_wickets: Option<u32>,
    #[serde(default)]
    contexts: Vec<RawContextSection>,
}

#[derive(Deserialize)]
struct RawContextSection {
    context_key: String,
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

impl Serialize for TransitionModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TransitionModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        TransitionModel::from_document_str(&value.to_string()).map_err(serde::de::Error::custom)
    }
}

/// Terminal payoffs and the optional per-wicket penalty for risky play.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub win_reward: f64,
    pub loss_reward: f64,
    pub per_wicket_penalty: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        Self {
            win_reward: 1.0,
            loss_reward: 0.0,
            per_wicket_penalty: 0.0,
        }
    }
}

impl RewardSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.win_reward.is_finite() && self.loss_reward.is_finite()) {
            return Err(Error::InvalidReward("rewards must be finite".into()));
        }
        if self.win_reward <= self.loss_reward {
            return Err(Error::InvalidReward(format!(
                "win_reward {} must exceed loss_reward {}",
                self.win_reward, self.loss_reward
            )));
        }
        if !(self.per_wicket_penalty >= 0.0 && self.per_wicket_penalty.is_finite()) {
            return Err(Error::InvalidReward(format!(
                "per_wicket_penalty {} must be a finite non-negative number",
                self.per_wicket_penalty
            )));
        }
        Ok(())
    }

    /// Payoff of a terminal state (zero for live states).
    pub fn terminal_value(&self, state: MatchState) -> f64 {
        match state.status() {
            super::TerminalStatus::Win => self.win_reward,
            super::TerminalStatus::Loss => self.loss_reward,
            super::TerminalStatus::NonTerminal => 0.0,
        }
    }

    /// Immediate penalty attached to a delivery outcome.
    pub fn step_penalty(&self, outcome: BallOutcome) -> f64 {
        if outcome == BallOutcome::Wicket {
            self.per_wicket_penalty
        } else {
            0.0
        }
    }
}
