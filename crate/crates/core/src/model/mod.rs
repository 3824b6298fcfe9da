//! The run-chase decision model: match state, batting actions, single-ball
//! outcomes and the transition semantics every other module builds on.

mod context;
mod distribution;
mod transition;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use context::{ContextBucket, Phase, RateBand, WicketsBand};
pub use distribution::{OutcomeDistribution, Tilted, MAX_AGGRESSION, MIN_AGGRESSION};
pub use transition::{
    balanced_baseline, reference_aggressive_row, ActionRows, ContextTable, RewardSpec, TransitionModel,
    TransitionModelDocument, DEFAULT_TILTS,
};

/// Decision state of a chase: runs still needed, legal deliveries left and
/// wickets in hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchState {
    pub runs_needed: u32,
    pub balls_remaining: u32,
    pub wickets_in_hand: u32,
}

impl MatchState {
    pub const fn new(runs_needed: u32, balls_remaining: u32, wickets_in_hand: u32) -> Self {
        Self {
            runs_needed,
            balls_remaining,
            wickets_in_hand,
        }
    }

    /// WIN takes precedence: a chase completed on the last ball, or by the
    /// last pair, is a win.
    pub fn status(&self) -> TerminalStatus {
        if self.runs_needed == 0 {
            TerminalStatus::Win
        } else if self.balls_remaining == 0 || self.wickets_in_hand == 0 {
            TerminalStatus::Loss
        } else {
            TerminalStatus::NonTerminal
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.status() != TerminalStatus::NonTerminal
    }

    /// Advances the state by one delivery.
    pub fn apply(self, outcome: BallOutcome) -> Result<MatchState> {
        let status = self.status();
        if status != TerminalStatus::NonTerminal {
            return Err(Error::TerminalState {
                state: self,
                status,
            });
        }
        Ok(self.successor(outcome))
    }

    /// Successor without the terminal guard; callers must know the state is
    /// live.
    pub(crate) fn successor(self, outcome: BallOutcome) -> MatchState {
        match outcome.runs() {
            Some(k) => MatchState::new(
                self.runs_needed.saturating_sub(k),
                self.balls_remaining - 1,
                self.wickets_in_hand,
            ),
            None => MatchState::new(
                self.runs_needed,
                self.balls_remaining - 1,
                self.wickets_in_hand - 1,
            ),
        }
    }
}

impl fmt::Display for MatchState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{}",
            self.runs_needed, self.balls_remaining, self.wickets_in_hand
        )
    }
}

impl FromStr for MatchState {
    type Err = String;

    /// Parses `"runs,balls,wickets"`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected runs,balls,wickets but got {s:?}"));
        }
        let field = |i: usize| {
            parts[i]
                .parse::<u32>()
                .map_err(|e| format!("bad state component {:?}: {e}", parts[i]))
        };
        Ok(MatchState::new(field(0)?, field(1)?, field(2)?))
    }
}

pub fn apply_outcome(state: MatchState, outcome: BallOutcome) -> Result<MatchState> {
    state.apply(outcome)
}

pub fn terminal_status(state: MatchState) -> TerminalStatus {
    state.status()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TerminalStatus {
    Win,
    Loss,
    NonTerminal,
}

impl fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalStatus::Win => "WIN",
            TerminalStatus::Loss => "LOSS",
            TerminalStatus::NonTerminal => "NON_TERMINAL",
        })
    }
}

/// Batting approach, ordered by aggression. The derived `Ord` is the
/// aggression order and is used for every tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BattingAction {
    UltraDefensive,
    Defensive,
    Balanced,
    Aggressive,
    UltraAggressive,
}

impl BattingAction {
    pub const ALL: [BattingAction; 5] = [
        BattingAction::UltraDefensive,
        BattingAction::Defensive,
        BattingAction::Balanced,
        BattingAction::Aggressive,
        BattingAction::UltraAggressive,
    ];

    pub const COUNT: usize = 5;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BattingAction::UltraDefensive => "ULTRA_DEFENSIVE",
            BattingAction::Defensive => "DEFENSIVE",
            BattingAction::Balanced => "BALANCED",
            BattingAction::Aggressive => "AGGRESSIVE",
            BattingAction::UltraAggressive => "ULTRA_AGGRESSIVE",
        }
    }
}

impl fmt::Display for BattingAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BattingAction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|a| a.name() == upper)
            .ok_or_else(|| format!("unknown batting action {s:?}"))
    }
}

/// Result of a single delivery. Runs are restricted to {0,1,2,3,4,6}; a
/// wicket carries no runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BallOutcome {
    Dot,
    One,
    Two,
    Three,
    Four,
    Six,
    Wicket,
}

impl BallOutcome {
    /// Canonical order, also the inverse-transform sampling order.
    pub const ALL: [BallOutcome; 7] = [
        BallOutcome::Dot,
        BallOutcome::One,
        BallOutcome::Two,
        BallOutcome::Three,
        BallOutcome::Four,
        BallOutcome::Six,
        BallOutcome::Wicket,
    ];

    pub const COUNT: usize = 7;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn runs(self) -> Option<u32> {
        match self {
            BallOutcome::Dot => Some(0),
            BallOutcome::One => Some(1),
            BallOutcome::Two => Some(2),
            BallOutcome::Three => Some(3),
            BallOutcome::Four => Some(4),
            BallOutcome::Six => Some(6),
            BallOutcome::Wicket => None,
        }
    }

    /// `RUNS(k)`; `None` for k outside the model support.
    pub fn from_runs(k: u32) -> Option<Self> {
        match k {
            0 => Some(BallOutcome::Dot),
            1 => Some(BallOutcome::One),
            2 => Some(BallOutcome::Two),
            3 => Some(BallOutcome::Three),
            4 => Some(BallOutcome::Four),
            6 => Some(BallOutcome::Six),
            _ => None,
        }
    }

    /// Short label used in traces and interchange bodies: `"0"`..`"6"`, `"W"`.
    pub fn label(self) -> &'static str {
        match self {
            BallOutcome::Dot => "0",
            BallOutcome::One => "1",
            BallOutcome::Two => "2",
            BallOutcome::Three => "3",
            BallOutcome::Four => "4",
            BallOutcome::Six => "6",
            BallOutcome::Wicket => "W",
        }
    }

    /// Field name inside transition-model documents.
    pub fn field_name(self) -> &'static str {
        match self {
            BallOutcome::Dot => "dot",
            BallOutcome::One => "single",
            BallOutcome::Two => "double",
            BallOutcome::Three => "triple",
            BallOutcome::Four => "four",
            BallOutcome::Six => "six",
            BallOutcome::Wicket => "wicket",
        }
    }
}

impl fmt::Display for BallOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BallOutcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("W") || t.eq_ignore_ascii_case("WICKET") {
            return Ok(BallOutcome::Wicket);
        }
        let digits = t
            .strip_prefix("RUNS(")
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t);
        digits
            .parse::<u32>()
            .ok()
            .and_then(BallOutcome::from_runs)
            .ok_or_else(|| format!("unknown ball outcome {s:?}"))
    }
}

impl Serialize for BallOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for BallOutcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive upper limits of a tabulated state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub max_runs: u32,
    pub max_balls: u32,
    pub max_wickets: u32,
}

impl Bounds {
    pub const fn new(max_runs: u32, max_balls: u32, max_wickets: u32) -> Self {
        Self {
            max_runs,
            max_balls,
            max_wickets,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_runs == 0 || self.max_balls == 0 || self.max_wickets == 0 {
            return Err(Error::InvalidBounds(format!(
                "every bound must be at least 1, got {self}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, s: MatchState) -> bool {
        s.runs_needed <= self.max_runs
            && s.balls_remaining <= self.max_balls
            && s.wickets_in_hand <= self.max_wickets
    }

    /// Number of states (terminal included) in the box.
    pub fn len(&self) -> usize {
        (self.max_runs as usize + 1) * (self.max_balls as usize + 1) * (self.max_wickets as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dense row-major index, runs outermost.
    pub fn index(&self, s: MatchState) -> Option<usize> {
        if !self.contains(s) {
            return None;
        }
        let balls = self.max_balls as usize + 1;
        let wickets = self.max_wickets as usize + 1;
        Some(
            (s.runs_needed as usize * balls + s.balls_remaining as usize) * wickets
                + s.wickets_in_hand as usize,
        )
    }

    /// Every state in the box, in index order.
    pub fn states(&self) -> impl Iterator<Item = MatchState> + '_ {
        (0..=self.max_runs).flat_map(move |r| {
            (0..=self.max_balls)
                .flat_map(move |b| (0..=self.max_wickets).map(move |w| MatchState::new(r, b, w)))
        })
    }

    pub fn non_terminal_states(&self) -> impl Iterator<Item = MatchState> + '_ {
        self.states().filter(|s| !s.is_terminal())
    }

    /// The largest state, the usual start of a chase tabulated with these
    /// bounds.
    pub fn top(&self) -> MatchState {
        MatchState::new(self.max_runs, self.max_balls, self.max_wickets)
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.max_runs, self.max_balls, self.max_wickets)
    }
}
