use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use std::collections::BTreeMap;

use crate::doc::{self, fixed12, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::model::{BattingAction, Bounds, MatchState, RewardSpec};

/// Dense state-value table over a bounded box of chase states.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    bounds: Bounds,
    values: Vec<f64>,
}

impl ValueTable {
    pub(crate) fn from_vec(bounds: Bounds, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), bounds.len());
        Self { bounds, values }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn get(&self, state: MatchState) -> Option<f64> {
        self.bounds.index(state).map(|i| self.values[i])
    }

    pub fn value(&self, state: MatchState) -> Result<f64> {
        self.get(state).ok_or(Error::OutOfBounds {
            state,
            bounds: self.bounds,
        })
    }

    /// Unchecked dense access for hot loops; `state` must be in bounds.
    pub(crate) fn at(&self, state: MatchState) -> f64 {
        self.values[self.bounds.index(state).expect("state within table bounds")]
    }

    pub fn iter(&self) -> impl Iterator<Item = (MatchState, f64)> + '_ {
        self.bounds.states().zip(self.values.iter().copied())
    }

    /// Largest absolute entry-wise difference; `None` when bounds differ.
    pub fn max_abs_diff(&self, other: &ValueTable) -> Option<f64> {
        (self.bounds == other.bounds).then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }
}

/// Chosen action for every non-terminal state in the box.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    bounds: Bounds,
    actions: Vec<Option<BattingAction>>,
}

impl PolicyTable {
    /// Empty policy; every state unassigned.
    pub fn empty(bounds: Bounds) -> Self {
        Self {
            bounds,
            actions: vec![None; bounds.len()],
        }
    }

    /// The same action everywhere a decision is needed.
    pub fn constant(bounds: Bounds, action: BattingAction) -> Self {
        Self::from_fn(bounds, |_| action)
    }

    pub fn from_fn(bounds: Bounds, mut f: impl FnMut(MatchState) -> BattingAction) -> Self {
        let actions = bounds
            .states()
            .map(|s| (!s.is_terminal()).then(|| f(s)))
            .collect();
        Self { bounds, actions }
    }

    pub(crate) fn from_vec(bounds: Bounds, actions: Vec<Option<BattingAction>>) -> Self {
        Self { bounds, actions }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn get(&self, state: MatchState) -> Option<BattingAction> {
        self.bounds.index(state).and_then(|i| self.actions[i])
    }

    /// Assigns `action` at `state`; out-of-bounds states are ignored.
    pub fn set(&mut self, state: MatchState, action: BattingAction) {
        if let Some(i) = self.bounds.index(state) {
            self.actions[i] = Some(action);
        }
    }

    pub fn unset(&mut self, state: MatchState) {
        if let Some(i) = self.bounds.index(state) {
            self.actions[i] = None;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (MatchState, BattingAction)> + '_ {
        self.bounds
            .states()
            .zip(self.actions.iter())
            .filter_map(|(s, a)| a.map(|a| (s, a)))
    }
}

/// Persisted form of a solved value/policy pair.
///
/// `entries` is keyed `"r,b,w"` in table order; terminal states carry no
/// action.
#[derive(Debug, Clone, Deserialize)]
pub struct ChaseTablesDocument {
    pub schema_version: u32,
    pub bounds: Bounds,
    pub reward_spec: RewardSpec,
    #[serde(default)]
    pub model_sha256: Option<String>,
    pub entries: BTreeMap<String, TableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    #[serde(serialize_with = "fixed12")]
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<BattingAction>,
}

impl ChaseTablesDocument {
    pub fn from_tables(
        values: &ValueTable,
        policy: &PolicyTable,
        reward: RewardSpec,
        model_sha256: Option<String>,
    ) -> Result<Self> {
        if values.bounds() != policy.bounds() {
            return Err(Error::InvalidBounds(format!(
                "value bounds {} differ from policy bounds {}",
                values.bounds(),
                policy.bounds()
            )));
        }
        let mut entries = BTreeMap::new();
        for (state, value) in values.iter() {
            entries.insert(
                state.to_string(),
                TableEntry {
                    value,
                    action: policy.get(state),
                },
            );
        }
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            bounds: values.bounds(),
            reward_spec: reward,
            model_sha256,
            entries,
        })
    }

    pub fn to_tables(&self) -> Result<(ValueTable, PolicyTable)> {
        self.bounds.validate()?;
        let mut values = vec![0.0; self.bounds.len()];
        let mut actions = vec![None; self.bounds.len()];
        let mut seen = 0usize;
        for (key, entry) in &self.entries {
            let state: MatchState = key
                .parse()
                .map_err(|e: String| Error::InvalidParams(format!("entry key: {e}")))?;
            let i = self.bounds.index(state).ok_or(Error::OutOfBounds {
                state,
                bounds: self.bounds,
            })?;
            values[i] = entry.value;
            if !state.is_terminal() {
                actions[i] = Some(entry.action.ok_or(Error::PolicyGap(state))?);
            }
            seen += 1;
        }
        if seen != self.bounds.len() {
            return Err(Error::InvalidParams(format!(
                "table lists {seen} entries but bounds {} need {}",
                self.bounds,
                self.bounds.len()
            )));
        }
        Ok((
            ValueTable::from_vec(self.bounds, values),
            PolicyTable::from_vec(self.bounds, actions),
        ))
    }

    pub fn to_document_string(&self) -> Result<String> {
        doc::to_document(self)
    }

    pub fn from_document_str(text: &str) -> Result<Self> {
        doc::from_document(text)
    }
}

impl Serialize for ChaseTablesDocument {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Entries<'a>(&'a ChaseTablesDocument);
        impl Serialize for Entries<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let doc = self.0;
                let mut map = s.serialize_map(Some(doc.entries.len()))?;
                for state in doc.bounds.states() {
                    let key = state.to_string();
                    if let Some(entry) = doc.entries.get(&key) {
                        map.serialize_entry(&key, entry)?;
                    }
                }
                map.end()
            }
        }

        let mut map = s.serialize_map(None)?;
        map.serialize_entry("schema_version", &self.schema_version)?;
        map.serialize_entry("bounds", &self.bounds)?;
        map.serialize_entry("reward_spec", &self.reward_spec)?;
        if let Some(hash) = &self.model_sha256 {
            map.serialize_entry("model_sha256", hash)?;
        }
        map.serialize_entry("entries", &Entries(self))?;
        map.end()
    }
}
