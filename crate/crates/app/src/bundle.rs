//! Model bundles: a transition model, reward spec and the tables solved
//! from it, hash-linked so stale tables cannot be served.

use std::path::Path;

use chase_core::doc::{self, SCHEMA_VERSION};
use chase_core::model::{Bounds, RewardSpec, TransitionModel};
use chase_core::solver::{solve_chase, ChaseTablesDocument, PolicyTable, ValueTable};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::AppError;

/// Loaded tables may differ from a fresh solve by print rounding only.
const TABLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreationInfo {
    pub tool: String,
    pub solver: String,
    pub states_evaluated: usize,
}

#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub bundle_id: String,
    pub model: TransitionModel,
    pub model_sha256: String,
    pub reward: RewardSpec,
    pub values: ValueTable,
    pub policy: PolicyTable,
    pub created: CreationInfo,
}

#[derive(Serialize, Deserialize)]
struct BundleDocument {
    schema_version: u32,
    bundle_id: String,
    created: CreationInfo,
    model_sha256: String,
    model: TransitionModel,
    tables: ChaseTablesDocument,
}

/// Default id: a short digest of the model hash, bounds and reward spec.
fn default_bundle_id(model_sha256: &str, bounds: Bounds, reward: &RewardSpec) -> String {
    let key = format!(
        "{model_sha256}|{bounds}|{}|{}|{}",
        reward.win_reward, reward.loss_reward, reward.per_wicket_penalty
    );
    format!("b-{}", &hex::encode(Sha256::digest(key.as_bytes()))[..12])
}

impl ModelBundle {
    /// Solves `model` on `bounds`. The model is snapped to the document
    /// grid first so the bundled copy hashes identically after a reload.
    pub fn solve(
        bundle_id: Option<String>,
        model: &TransitionModel,
        reward: RewardSpec,
        bounds: Bounds,
    ) -> Result<Self, AppError> {
        let model = model.quantized();
        let model_sha256 = model.fingerprint()?;
        let solution = solve_chase(&model, &reward, bounds)?;
        Ok(Self {
            bundle_id: bundle_id.unwrap_or_else(|| default_bundle_id(&model_sha256, bounds, &reward)),
            model,
            model_sha256,
            reward,
            values: solution.values,
            policy: solution.policy,
            created: CreationInfo {
                tool: "chase solve".into(),
                solver: "backward-induction".into(),
                states_evaluated: solution.report.states_evaluated,
            },
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.values.bounds()
    }

    pub fn tables_document(&self) -> Result<ChaseTablesDocument, AppError> {
        Ok(ChaseTablesDocument::from_tables(
            &self.values,
            &self.policy,
            self.reward,
            Some(self.model_sha256.clone()),
        )?)
    }

    pub fn to_document_string(&self) -> Result<String, AppError> {
        Ok(doc::to_document(&BundleDocument {
            schema_version: SCHEMA_VERSION,
            bundle_id: self.bundle_id.clone(),
            created: self.created.clone(),
            model_sha256: self.model_sha256.clone(),
            model: self.model.clone(),
            tables: self.tables_document()?,
        })?)
    }

    /// Parses a bundle and checks that the model hash, the tables' hash
    /// and a fresh solve of the bundled model all agree.
    pub fn from_document_str(text: &str) -> Result<Self, AppError> {
        let d: BundleDocument = doc::from_document(text)?;
        doc::ensure_version(d.tables.schema_version)?;
        let actual = d.model.fingerprint()?;
        if actual != d.model_sha256 {
            return Err(AppError::HashMismatch {
                expected: d.model_sha256,
                actual,
            });
        }
        match &d.tables.model_sha256 {
            Some(h) if *h == actual => {}
            other => {
                return Err(AppError::HashMismatch {
                    expected: actual,
                    actual: other.clone().unwrap_or_else(|| "<none>".into()),
                })
            }
        }
        let (values, policy) = d.tables.to_tables()?;
        let fresh = solve_chase(&d.model, &d.tables.reward_spec, values.bounds())?;
        let diff = fresh.values.max_abs_diff(&values).unwrap_or(f64::INFINITY);
        if diff > TABLE_TOLERANCE {
            return Err(AppError::StaleTables(diff));
        }
        Ok(Self {
            bundle_id: d.bundle_id,
            model: d.model,
            model_sha256: actual,
            reward: d.tables.reward_spec,
            values,
            policy,
            created: d.created,
        })
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_document_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), AppError> {
        std::fs::write(path, self.to_document_string()?).map_err(|e| AppError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chase_core::model::MatchState;

    fn small() -> ModelBundle {
        ModelBundle::solve(None, &TransitionModel::default_chase(), RewardSpec::default(), Bounds::new(12, 6, 2))
            .unwrap()
    }

    #[test]
    fn round_trip_keeps_tables() {
        let b = small();
        let text = b.to_document_string().unwrap();
        let back = ModelBundle::from_document_str(&text).unwrap();
        assert_eq!(back.bundle_id, b.bundle_id);
        assert_eq!(back.model, b.model);
        assert!(back.values.max_abs_diff(&b.values).unwrap() <= 5e-13);
        assert_eq!(back.to_document_string().unwrap(), text);
        assert!(b.bundle_id.starts_with("b-"));
    }

    #[test]
    fn tampered_model_is_rejected() {
        let text = small().to_document_string().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        // Swap dot and single in the balanced row; the row stays valid.
        let row = &mut v["model"]["rows"]["BALANCED"];
        let (dot, single) = (row["dot"].clone(), row["single"].clone());
        row["dot"] = single;
        row["single"] = dot;
        let tampered = serde_json::to_string_pretty(&v).unwrap();
        assert!(matches!(
            ModelBundle::from_document_str(&tampered),
            Err(AppError::HashMismatch { .. })
        ));
    }

    #[test]
    fn tampered_value_is_rejected() {
        let b = small();
        let text = b.to_document_string().unwrap();
        let v = b.values.value(MatchState::new(12, 6, 2)).unwrap();
        let printed = doc::format_fixed12(v);
        let bumped = doc::format_fixed12(v + 1e-6);
        let tampered = text.replacen(&printed, &bumped, 1);
        assert!(matches!(
            ModelBundle::from_document_str(&tampered),
            Err(AppError::StaleTables(_))
        ));
    }
}
