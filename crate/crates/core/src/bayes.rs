//! Conjugate Normal model of latent player ability with known observation
//! noise.

use serde::{Deserialize, Serialize};

use crate::doc::{self, fixed12, SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Default observation variance: 15 runs standard deviation.
pub const DEFAULT_OBSERVATION_VARIANCE: f64 = 225.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalBelief {
    #[serde(serialize_with = "fixed12")]
    pub mean: f64,
    #[serde(serialize_with = "fixed12")]
    pub variance: f64,
}

impl NormalBelief {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidParams(format!("belief mean {mean} is not finite")));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidParams(format!(
                "belief variance must be positive and finite, got {variance}"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn precision(&self) -> f64 {
        1.0 / self.variance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    pub observation_variance: f64,
}

impl Default for ObservationModel {
    fn default() -> Self {
        Self {
            observation_variance: DEFAULT_OBSERVATION_VARIANCE,
        }
    }
}

impl ObservationModel {
    pub fn new(observation_variance: f64) -> Result<Self> {
        if !(observation_variance > 0.0) {
            return Err(Error::InvalidParams(format!(
                "observation variance must be positive, got {observation_variance}"
            )));
        }
        Ok(Self {
            observation_variance,
        })
    }
}

/// One observed score. Written in gain form: the mean moves toward the
/// score by `v / (v + s2)` of the gap and the variance shrinks by the same
/// factor's complement.
pub fn update_belief(prior: NormalBelief, score: f64, obs: &ObservationModel) -> NormalBelief {
    let s2 = obs.observation_variance;
    let gain = prior.variance / (prior.variance + s2);
    NormalBelief {
        mean: prior.mean + gain * (score - prior.mean),
        variance: prior.variance * s2 / (prior.variance + s2),
    }
}

/// Sequential updates folded over `scores` in order.
pub fn update_belief_fold(prior: NormalBelief, scores: &[f64], obs: &ObservationModel) -> NormalBelief {
    scores.iter().fold(prior, |b, &x| update_belief(b, x, obs))
}

/// Closed-form update on `n` scores: the sample mean observed with
/// variance `s2 / n`. Matches [`update_belief_fold`] and does not depend
/// on score order beyond summation rounding.
pub fn update_belief_batch(prior: NormalBelief, scores: &[f64], obs: &ObservationModel) -> NormalBelief {
    if scores.is_empty() {
        return prior;
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    update_belief(
        prior,
        mean,
        &ObservationModel {
            observation_variance: obs.observation_variance / n,
        },
    )
}

/// Mean and variance of the next score with ability integrated out.
pub fn posterior_predictive(belief: NormalBelief, obs: &ObservationModel) -> (f64, f64) {
    (belief.mean, belief.variance + obs.observation_variance)
}

/// Standard normal quantile by Acklam's rational approximation (relative
/// error below 1.2e-9 over (0, 1)).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239e0,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838e0,
        -2.549732539343734e0,
        4.374664141464968e0,
        2.938163982698783e0,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996e0,
        3.754408661907416e0,
    ];
    const LOW: f64 = 0.02425;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - LOW {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Central interval holding `mass` of the belief.
pub fn credible_interval(belief: NormalBelief, mass: f64) -> Result<(f64, f64)> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::InvalidParams(format!("mass must lie in (0, 1), got {mass}")));
    }
    let half = normal_quantile(0.5 + mass / 2.0) * belief.std_dev();
    Ok((belief.mean - half, belief.mean + half))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub player_id: String,
    #[serde(serialize_with = "fixed12")]
    pub mean: f64,
    #[serde(serialize_with = "fixed12")]
    pub variance: f64,
    pub observations_count: u64,
}

impl BeliefSnapshot {
    pub fn new(player_id: impl Into<String>, belief: NormalBelief, observations_count: u64) -> Self {
        Self {
            player_id: player_id.into(),
            mean: belief.mean,
            variance: belief.variance,
            observations_count,
        }
    }

    pub fn belief(&self) -> Result<NormalBelief> {
        NormalBelief::new(self.mean, self.variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshotDocument {
    pub schema_version: u32,
    pub snapshots: Vec<BeliefSnapshot>,
}

impl BeliefSnapshotDocument {
    pub fn new(snapshots: Vec<BeliefSnapshot>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            snapshots,
        }
    }

    pub fn to_document_string(&self) -> Result<String> {
        doc::to_document(self)
    }

    pub fn from_document_str(text: &str) -> Result<Self> {
        let d: Self = doc::from_document(text)?;
        for s in &d.snapshots {
            s.belief()?;
        }
        Ok(d)
    }
}
