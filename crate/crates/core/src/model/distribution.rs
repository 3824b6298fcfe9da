use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};

use super::BallOutcome;
use crate::doc::format_fixed12;
use crate::error::{Error, Result};

/// Sum-to-one tolerance enforced on construction.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Looser tolerance accepted when reading documents; parsed rows are then
/// snapped onto the 1e-12 grid so they sum to one exactly in decimal.
const PARSE_TOLERANCE: f64 = 1e-9;

const GRID: f64 = 1e12;

pub const MIN_AGGRESSION: f64 = 0.25;
pub const MAX_AGGRESSION: f64 = 4.0;

/// Probability table over the seven single-ball outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    probs: [f64; BallOutcome::COUNT],
}

/// Output of [`OutcomeDistribution::tilt`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tilted {
    pub distribution: OutcomeDistribution,
    /// The dot-ball mass could not absorb the shift and was clipped at zero
    /// before renormalizing.
    pub clipped: bool,
}

impl OutcomeDistribution {
    /// Probabilities in canonical outcome order `{0,1,2,3,4,6,W}`.
    pub fn new(probs: [f64; BallOutcome::COUNT]) -> Result<Self> {
        validate(&probs, SUM_TOLERANCE)?;
        Ok(Self { probs })
    }

    pub fn from_pairs(pairs: &[(BallOutcome, f64)]) -> Result<Self> {
        let mut probs = [0.0; BallOutcome::COUNT];
        for &(o, p) in pairs {
            probs[o.index()] += p;
        }
        Self::new(probs)
    }

    pub fn point_mass(outcome: BallOutcome) -> Self {
        let mut probs = [0.0; BallOutcome::COUNT];
        probs[outcome.index()] = 1.0;
        Self { probs }
    }

    pub fn prob(&self, outcome: BallOutcome) -> f64 {
        self.probs[outcome.index()]
    }

    pub fn probs(&self) -> &[f64; BallOutcome::COUNT] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (BallOutcome, f64)> + '_ {
        BallOutcome::ALL.into_iter().map(|o| (o, self.prob(o)))
    }

    /// Expected runs per ball; a wicket contributes nothing.
    pub fn expected_runs(&self) -> f64 {
        self.iter()
            .filter_map(|(o, p)| o.runs().map(|k| k as f64 * p))
            .sum()
    }

    pub fn boundary_mass(&self) -> f64 {
        self.prob(BallOutcome::Four) + self.prob(BallOutcome::Six)
    }

    /// Scales boundary (4, 6) and wicket mass by `aggression`; the dot ball
    /// absorbs the difference. If the dot ball would go negative it is
    /// clipped at zero, the row renormalized and a warning logged.
    pub fn tilt(&self, aggression: f64) -> Result<Tilted> {
        if !(MIN_AGGRESSION..=MAX_AGGRESSION).contains(&aggression) {
            return Err(Error::AggressionOutOfRange(aggression));
        }
        let mut probs = self.probs;
        let scaled = [BallOutcome::Four, BallOutcome::Six, BallOutcome::Wicket];
        let mut shift = 0.0;
        for o in scaled {
            let before = probs[o.index()];
            probs[o.index()] = before * aggression;
            shift += probs[o.index()] - before;
        }
        let dot = BallOutcome::Dot.index();
        probs[dot] -= shift;
        let clipped = probs[dot] < 0.0;
        if clipped {
            log::warn!(
                "tilt by {aggression} drives the dot-ball probability to {:.6}; clipping at zero",
                probs[dot]
            );
            probs[dot] = 0.0;
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Tilted {
            distribution: OutcomeDistribution::new(probs)?,
            clipped,
        })
    }

    /// Snaps the row onto the 1e-12 grid (largest-remainder rounding) so
    /// the 12-digit printed form sums to exactly one and reads back to the
    /// identical doubles. Zero entries stay zero; idempotent.
    pub fn quantized(&self) -> Self {
        let total: f64 = self.probs.iter().sum();
        let mut units = [0u64; BallOutcome::COUNT];
        let mut remainders = [(0.0f64, 0usize); BallOutcome::COUNT];
        for (i, &p) in self.probs.iter().enumerate() {
            let x = p / total * GRID;
            let whole = if (x - x.round()).abs() < 1e-6 {
                x.round()
            } else {
                x.floor()
            };
            units[i] = whole as u64;
            remainders[i] = (x - whole, i);
        }
        let assigned: u64 = units.iter().sum();
        let mut deficit = (GRID as u64).saturating_sub(assigned);
        remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in remainders.iter().cycle().take(BallOutcome::COUNT * 2) {
            if deficit == 0 {
                break;
            }
            if self.probs[i] > 0.0 {
                units[i] += 1;
                deficit -= 1;
            }
        }
        let mut probs = [0.0; BallOutcome::COUNT];
        for (p, u) in probs.iter_mut().zip(units) {
            *p = u as f64 / GRID;
        }
        Self { probs }
    }

    /// Parses a named-field row, tolerating print rounding.
    pub(crate) fn from_named(fields: &BTreeMap<String, f64>, context: &str) -> Result<Self> {
        let mut probs = [0.0; BallOutcome::COUNT];
        for (name, &p) in fields {
            let o = BallOutcome::ALL
                .into_iter()
                .find(|o| o.field_name() == name)
                .ok_or_else(|| Error::InvalidDistribution {
                    context: context.to_string(),
                    reason: format!("unknown outcome field {name:?}"),
                })?;
            probs[o.index()] = p;
        }
        validate(&probs, PARSE_TOLERANCE).map_err(|e| match e {
            Error::InvalidDistribution { reason, .. } => Error::InvalidDistribution {
                context: context.to_string(),
                reason,
            },
            other => other,
        })?;
        Ok(Self { probs }.quantized())
    }
}

fn validate(probs: &[f64; BallOutcome::COUNT], tolerance: f64) -> Result<()> {
    let invalid = |reason: String| Error::InvalidDistribution {
        context: "row".to_string(),
        reason,
    };
    for (o, &p) in BallOutcome::ALL.iter().zip(probs) {
        if !p.is_finite() || p < 0.0 {
            return Err(invalid(format!("p({o}) = {p} is not a probability")));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tolerance {
        return Err(invalid(format!("probabilities sum to {total}")));
    }
    Ok(())
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(BallOutcome::COUNT))?;
        for (o, p) in self.iter() {
            let raw = serde_json::value::RawValue::from_string(format_fixed12(p))
                .map_err(serde::ser::Error::custom)?;
            map.serialize_entry(o.field_name(), &raw)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for OutcomeDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let fields = BTreeMap::<String, f64>::deserialize(d)?;
        OutcomeDistribution::from_named(&fields, "row").map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn aggressive() -> OutcomeDistribution {
        OutcomeDistribution::from_pairs(&[
            (BallOutcome::Six, 0.05),
            (BallOutcome::Four, 0.15),
            (BallOutcome::Two, 0.20),
            (BallOutcome::One, 0.25),
            (BallOutcome::Dot, 0.25),
            (BallOutcome::Wicket, 0.10),
        ])
        .unwrap()
    }

    #[test]
    fn expected_runs_examples() {
        // 6(.05) + 4(.15) + 2(.20) + 1(.25) = 0.30 + 0.60 + 0.40 + 0.25
        let hand = 6.0 * 0.05 + 4.0 * 0.15 + 2.0 * 0.20 + 1.0 * 0.25;
        assert!((aggressive().expected_runs() - hand).abs() < 1e-15);
        assert!((aggressive().expected_runs() - 1.55).abs() < 1e-15);
        assert_eq!(OutcomeDistribution::point_mass(BallOutcome::Dot).expected_runs(), 0.0);
        assert_eq!(OutcomeDistribution::point_mass(BallOutcome::Six).expected_runs(), 6.0);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(OutcomeDistribution::new([0.5, 0.5, 0.1, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(OutcomeDistribution::new([1.2, -0.2, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(OutcomeDistribution::new([f64::NAN, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn tilt_doubles_boundaries_and_wickets() {
        let base = OutcomeDistribution::from_pairs(&[
            (BallOutcome::Dot, 0.40),
            (BallOutcome::One, 0.30),
            (BallOutcome::Four, 0.15),
            (BallOutcome::Six, 0.05),
            (BallOutcome::Wicket, 0.10),
        ])
        .unwrap();
        let t = base.tilt(2.0).unwrap();
        assert!(!t.clipped);
        // boundary 0.20 -> 0.40, wicket 0.10 -> 0.20, dot 0.40 - 0.30 = 0.10
        let d = t.distribution;
        assert!((d.boundary_mass() - 0.40).abs() < 1e-15);
        assert!((d.prob(BallOutcome::Wicket) - 0.20).abs() < 1e-15);
        assert!((d.prob(BallOutcome::Dot) - 0.10).abs() < 1e-15);
        assert!((d.prob(BallOutcome::One) - 0.30).abs() < 1e-15);
    }

    #[test]
    fn tilt_clips_and_renormalizes() {
        let base = OutcomeDistribution::new([0.40, 0.30, 0.0, 0.0, 0.15, 0.05, 0.10]).unwrap();
        let t = base.tilt(4.0).unwrap();
        assert!(t.clipped);
        // scaled: four .6, six .2, wicket .4, single .3 -> total 1.5
        let d = t.distribution;
        assert_eq!(d.prob(BallOutcome::Dot), 0.0);
        assert!((d.prob(BallOutcome::One) - 0.3 / 1.5).abs() < 1e-15);
        assert!((d.prob(BallOutcome::Wicket) - 0.4 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn tilt_range_is_enforced() {
        assert!(aggressive().tilt(0.1).is_err());
        assert!(aggressive().tilt(4.5).is_err());
    }

    #[test]
    fn zero_boundary_stays_zero() {
        let base = OutcomeDistribution::new([0.5, 0.4, 0.0, 0.0, 0.0, 0.0, 0.1]).unwrap();
        for k in [0.25, 0.5, 1.5, 3.0] {
            assert_eq!(base.tilt(k).unwrap().distribution.boundary_mass(), 0.0);
        }
    }

    #[test]
    fn document_round_trip_is_exact_after_quantizing() {
        let d = aggressive().tilt(1.3).unwrap().distribution.quantized();
        let text = serde_json::to_string(&d).unwrap();
        let back: OutcomeDistribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        assert!(text.contains("\"six\":0.065000000000"));
    }

    #[test]
    fn parsing_accepts_print_rounding() {
        let text = r#"{"dot":0.333333333333,"single":0.333333333333,"double":0.333333333333,
                       "triple":0,"four":0,"six":0,"wicket":0}"#;
        let d: OutcomeDistribution = serde_json::from_str(text).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(serde_json::from_str::<OutcomeDistribution>(r#"{"dot":0.9}"#).is_err());
        assert!(serde_json::from_str::<OutcomeDistribution>(r#"{"dots":1.0}"#).is_err());
    }

    fn arb_distribution() -> impl Strategy<Value = OutcomeDistribution> {
        proptest::collection::vec(0.0f64..1.0, 7).prop_filter_map("all zero", |w| {
            let total: f64 = w.iter().sum();
            if total < 1e-6 {
                return None;
            }
            let mut probs = [0.0; 7];
            for (p, x) in probs.iter_mut().zip(&w) {
                *p = x / total;
            }
            // exact normalization may still miss 1 by an ulp or two
            OutcomeDistribution::new(probs).ok()
        })
    }

    proptest! {
        #[test]
        fn identity_tilt(d in arb_distribution()) {
            let t = d.tilt(1.0).unwrap();
            for (a, b) in t.distribution.probs().iter().zip(d.probs()) {
                prop_assert!((a - b).abs() <= 1e-15);
            }
        }

        #[test]
        fn tilt_output_is_a_distribution(d in arb_distribution(), k in MIN_AGGRESSION..MAX_AGGRESSION) {
            let t = d.tilt(k).unwrap().distribution;
            prop_assert!(t.probs().iter().all(|&p| p >= 0.0));
            prop_assert!((t.probs().iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE);
        }

        #[test]
        fn quantizing_is_idempotent(d in arb_distribution()) {
            let q = d.quantized();
            prop_assert_eq!(q.quantized(), q);
            prop_assert!((q.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-14);
            for (a, b) in q.probs().iter().zip(d.probs()) {
                prop_assert!((a - b).abs() <= 2e-12);
                prop_assert!(*b != 0.0 || *a == 0.0);
            }
        }
    }
}
