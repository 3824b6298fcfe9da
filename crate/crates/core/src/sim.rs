//! Seeded rollouts of the chase.
//!
//! The generator is SplitMix64 (64-bit state, `seed_from_u64` uses the seed
//! as the initial state). One uniform draw in [0, 1) is taken per ball and
//! mapped to an outcome by inverse transform over the fixed order
//! `0, 1, 2, 3, 4, 6, W`.
//!
//! Episode `i` (0-based) of a multi-episode run is seeded with
//! [`episode_seed`]`(master, i)`: the SplitMix64 output function applied to
//! `master + (i + 1) * 0x9E3779B97F4A7C15` (wrapping).

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BallOutcome, BattingAction, MatchState, OutcomeDistribution, TerminalStatus, TransitionModel,
};
use crate::solver::PolicyTable;

pub type SimRng = SplitMix64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn episode_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Inverse transform of `u` in [0, 1). Floating-point slack in the
/// cumulative sum falls through to the last outcome with positive mass.
pub fn sample_outcome(dist: &OutcomeDistribution, u: f64) -> BallOutcome {
    let mut acc = 0.0;
    let mut last = BallOutcome::Dot;
    for (o, p) in dist.iter() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = o;
        if u < acc {
            return o;
        }
    }
    last
}

pub fn simulate_ball<R: Rng + ?Sized>(
    state: MatchState,
    action: BattingAction,
    model: &TransitionModel,
    rng: &mut R,
) -> Result<(BallOutcome, MatchState)> {
    let status = state.status();
    if status != TerminalStatus::NonTerminal {
        return Err(Error::TerminalState { state, status });
    }
    let outcome = sample_outcome(model.row_at(action, state), rng.random::<f64>());
    Ok((outcome, state.successor(outcome)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub state: MatchState,
    pub action: BattingAction,
    pub outcome: BallOutcome,
    pub next: MatchState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub start: MatchState,
    pub steps: Vec<TraceStep>,
    pub result: TerminalStatus,
    pub seed: u64,
}

impl EpisodeTrace {
    pub fn end(&self) -> MatchState {
        self.steps.last().map_or(self.start, |s| s.next)
    }

    pub fn won(&self) -> bool {
        self.result == TerminalStatus::Win
    }

    /// One `r,b,w,action,outcome` line per step, newline-terminated.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&format!("{},{},{}\n", s.state, s.action, s.outcome));
        }
        out
    }
}

/// Plays one episode from `start`, asking `choose` for the action at every
/// live state. `None` from `choose` is a policy gap.
pub fn rollout<R: Rng + ?Sized>(
    start: MatchState,
    model: &TransitionModel,
    rng: &mut R,
    mut choose: impl FnMut(MatchState, &mut R) -> Option<BattingAction>,
) -> Result<(Vec<TraceStep>, TerminalStatus)> {
    let status = start.status();
    if status != TerminalStatus::NonTerminal {
        return Err(Error::TerminalState {
            state: start,
            status,
        });
    }
    let mut steps = Vec::with_capacity(start.balls_remaining as usize);
    let mut state = start;
    while !state.is_terminal() {
        let action = choose(state, rng).ok_or(Error::PolicyGap(state))?;
        let (outcome, next) = simulate_ball(state, action, model, rng)?;
        steps.push(TraceStep {
            state,
            action,
            outcome,
            next,
        });
        state = next;
    }
    Ok((steps, state.status()))
}

pub fn simulate_chase(
    start: MatchState,
    policy: &PolicyTable,
    model: &TransitionModel,
    seed: u64,
) -> Result<EpisodeTrace> {
    let mut rng = rng_from_seed(seed);
    let (steps, result) = rollout(start, model, &mut rng, |s, _| policy.get(s))?;
    Ok(EpisodeTrace {
        start,
        steps,
        result,
        seed,
    })
}

/// Outcome of an episode without recording the trace.
fn play_out(
    start: MatchState,
    policy: &PolicyTable,
    model: &TransitionModel,
    seed: u64,
) -> Result<bool> {
    let mut rng = rng_from_seed(seed);
    let mut state = start;
    while !state.is_terminal() {
        let action = policy.get(state).ok_or(Error::PolicyGap(state))?;
        state = simulate_ball(state, action, model, &mut rng)?.1;
    }
    Ok(state.status() == TerminalStatus::Win)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub episodes: u64,
    pub wins: u64,
    pub win_rate: f64,
    pub standard_error: f64,
    pub seed: u64,
}

impl SimulationSummary {
    pub fn from_counts(wins: u64, episodes: u64, seed: u64) -> Self {
        let p = wins as f64 / episodes as f64;
        Self {
            episodes,
            wins,
            win_rate: p,
            standard_error: (p * (1.0 - p) / episodes as f64).sqrt(),
            seed,
        }
    }

    /// Whether `value` lies within `k` standard errors of the win rate.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.win_rate - value).abs() <= k * self.standard_error
    }
}

/// Monte Carlo win probability under `policy`. Episodes run in parallel;
/// only the integer win count is aggregated, so the summary matches a
/// sequential run exactly.
pub fn estimate_win_probability(
    start: MatchState,
    policy: &PolicyTable,
    model: &TransitionModel,
    episodes: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    if episodes == 0 {
        return Err(Error::InvalidParams("episodes must be at least 1".into()));
    }
    let wins = (0..episodes)
        .into_par_iter()
        .map(|i| play_out(start, policy, model, episode_seed(seed, i)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(SimulationSummary::from_counts(wins, episodes, seed))
}

/// Sequential reference for [`estimate_win_probability`].
pub fn estimate_win_probability_sequential(
    start: MatchState,
    policy: &PolicyTable,
    model: &TransitionModel,
    episodes: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    if episodes == 0 {
        return Err(Error::InvalidParams("episodes must be at least 1".into()));
    }
    let mut wins = 0;
    for i in 0..episodes {
        wins += u64::from(play_out(start, policy, model, episode_seed(seed, i))?);
    }
    Ok(SimulationSummary::from_counts(wins, episodes, seed))
}
