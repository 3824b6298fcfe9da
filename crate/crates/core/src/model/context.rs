use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Innings phase by over index (0-based): overs 0-5, 6-14, 15+.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Powerplay,
    Middle,
    Death,
}

impl Phase {
    pub fn from_over(over: u32) -> Self {
        match over {
            0..=5 => Phase::Powerplay,
            6..=14 => Phase::Middle,
            _ => Phase::Death,
        }
    }
}

/// Wickets already down: 0-2, 3-5, 6+.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WicketsBand {
    #[serde(rename = "0-2")]
    Few,
    #[serde(rename = "3-5")]
    Some,
    #[serde(rename = "6+")]
    Many,
}

impl WicketsBand {
    pub fn from_wickets_down(down: u32) -> Self {
        match down {
            0..=2 => WicketsBand::Few,
            3..=5 => WicketsBand::Some,
            _ => WicketsBand::Many,
        }
    }
}

/// Required run rate in runs per over: LOW < 6, MEDIUM 6-9, HIGH > 9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RateBand {
    Low,
    Medium,
    High,
}

impl RateBand {
    pub fn from_rate(runs_per_over: f64) -> Self {
        if runs_per_over < 6.0 {
            RateBand::Low
        } else if runs_per_over <= 9.0 {
            RateBand::Medium
        } else {
            RateBand::High
        }
    }

    /// Band for `runs` still needed off `balls` legal deliveries. No balls
    /// left with runs still needed counts as HIGH.
    pub fn for_chase(runs: u32, balls: u32) -> Self {
        if balls == 0 {
            return if runs == 0 { RateBand::Low } else { RateBand::High };
        }
        Self::from_rate(runs as f64 * 6.0 / balls as f64)
    }
}

/// Coarse game situation used to pool historical deliveries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContextBucket {
    pub phase: Phase,
    pub wickets_band: WicketsBand,
    pub required_rate_band: RateBand,
}

impl ContextBucket {
    pub fn new(phase: Phase, wickets_band: WicketsBand, required_rate_band: RateBand) -> Self {
        Self {
            phase,
            wickets_band,
            required_rate_band,
        }
    }

    /// All 27 buckets in key order.
    pub fn all() -> Vec<ContextBucket> {
        let mut out = Vec::with_capacity(27);
        for phase in [Phase::Powerplay, Phase::Middle, Phase::Death] {
            for wickets in [WicketsBand::Few, WicketsBand::Some, WicketsBand::Many] {
                for rate in [RateBand::Low, RateBand::Medium, RateBand::High] {
                    out.push(ContextBucket::new(phase, wickets, rate));
                }
            }
        }
        out
    }

    /// Bucket of a chase state inside an innings of `innings_balls` legal
    /// deliveries with `squad_wickets` wickets available at the start.
    pub fn for_state(
        state: super::MatchState,
        innings_balls: u32,
        squad_wickets: u32,
    ) -> ContextBucket {
        let bowled = innings_balls.saturating_sub(state.balls_remaining);
        ContextBucket::new(
            Phase::from_over(bowled / 6),
            WicketsBand::from_wickets_down(squad_wickets.saturating_sub(state.wickets_in_hand)),
            RateBand::for_chase(state.runs_needed, state.balls_remaining),
        )
    }

    /// Text key, e.g. `DEATH/3-5/HIGH`.
    pub fn key(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ContextBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = match self.phase {
            Phase::Powerplay => "POWERPLAY",
            Phase::Middle => "MIDDLE",
            Phase::Death => "DEATH",
        };
        let wickets = match self.wickets_band {
            WicketsBand::Few => "0-2",
            WicketsBand::Some => "3-5",
            WicketsBand::Many => "6+",
        };
        let rate = match self.required_rate_band {
            RateBand::Low => "LOW",
            RateBand::Medium => "MEDIUM",
            RateBand::High => "HIGH",
        };
        write!(f, "{phase}/{wickets}/{rate}")
    }
}

impl FromStr for ContextBucket {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ContextBucket::all()
            .into_iter()
            .find(|b| b.to_string() == s.trim())
            .ok_or_else(|| format!("unknown context bucket {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MatchState;

    #[test]
    fn phase_boundaries() {
        assert_eq!(Phase::from_over(0), Phase::Powerplay);
        assert_eq!(Phase::from_over(5), Phase::Powerplay);
        assert_eq!(Phase::from_over(6), Phase::Middle);
        assert_eq!(Phase::from_over(14), Phase::Middle);
        assert_eq!(Phase::from_over(15), Phase::Death);
        assert_eq!(Phase::from_over(19), Phase::Death);
    }

    #[test]
    fn rate_bands() {
        assert_eq!(RateBand::from_rate(5.99), RateBand::Low);
        assert_eq!(RateBand::from_rate(6.0), RateBand::Medium);
        assert_eq!(RateBand::from_rate(9.0), RateBand::Medium);
        assert_eq!(RateBand::from_rate(9.01), RateBand::High);
        assert_eq!(RateBand::for_chase(10, 0), RateBand::High);
        assert_eq!(RateBand::for_chase(0, 0), RateBand::Low);
        // 50 off 30 is 10 an over
        assert_eq!(RateBand::for_chase(50, 30), RateBand::High);
    }

    #[test]
    fn bucket_keys_round_trip() {
        let all = ContextBucket::all();
        assert_eq!(all.len(), 27);
        for b in all {
            assert_eq!(b.key().parse::<ContextBucket>().unwrap(), b);
        }
    }

    #[test]
    fn state_bucket() {
        let b = ContextBucket::for_state(MatchState::new(50, 30, 5), 120, 10);
        assert_eq!(b.to_string(), "DEATH/3-5/HIGH");
        let b = ContextBucket::for_state(MatchState::new(150, 120, 10), 120, 10);
        assert_eq!(b.to_string(), "POWERPLAY/0-2/MEDIUM");
    }
}
