use crate::error::{Error, Result};
use crate::mdp::{Horizon, MdpBuilder, MdpInstance, Transition};
use crate::model::{BattingAction, Bounds, MatchState, RewardSpec, TransitionModel};

use super::{rank_actions, ActionValue, PolicyTable, SolveReport, ValueTable};

#[derive(Debug, Clone)]
pub struct ChaseSolution {
    pub values: ValueTable,
    pub policy: PolicyTable,
    pub report: SolveReport,
}

/// One-step lookahead value of `action` at live `state`, reading successor
/// values through `value_of`. Zero-probability outcomes are skipped.
fn lookahead(
    model: &TransitionModel,
    reward: &RewardSpec,
    state: MatchState,
    action: BattingAction,
    value_of: impl Fn(MatchState) -> f64,
) -> f64 {
    model
        .row_at(action, state)
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(o, p)| p * (value_of(state.successor(o)) - reward.step_penalty(o)))
        .sum()
}

/// Lookahead values of all five actions, in aggression order.
pub fn action_values(
    values: &ValueTable,
    model: &TransitionModel,
    reward: &RewardSpec,
    state: MatchState,
) -> Result<[f64; BattingAction::COUNT]> {
    check_live(values.bounds(), state)?;
    Ok(BattingAction::ALL.map(|a| lookahead(model, reward, state, a, |s| values.at(s))))
}

fn check_live(bounds: Bounds, state: MatchState) -> Result<()> {
    if !bounds.contains(state) {
        return Err(Error::OutOfBounds { state, bounds });
    }
    let status = state.status();
    if state.is_terminal() {
        return Err(Error::TerminalState { state, status });
    }
    Ok(())
}

/// Index of the best value; ties go to the lower index (lower aggression).
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Exact backward induction over the balls-remaining axis.
///
/// Layer `b` only reads layer `b - 1`, so one pass over `b = 0..=max_balls`
/// gives the optimal values. Terminal states take their payoff from
/// `reward`; WICKET branches subtract the per-wicket penalty.
pub fn solve_chase(
    model: &TransitionModel,
    reward: &RewardSpec,
    bounds: Bounds,
) -> Result<ChaseSolution> {
    reward.validate()?;
    bounds.validate()?;
    let mut values = vec![0.0; bounds.len()];
    let mut actions = vec![None; bounds.len()];
    let mut evaluated = 0usize;
    for b in 0..=bounds.max_balls {
        for r in 0..=bounds.max_runs {
            for w in 0..=bounds.max_wickets {
                let state = MatchState::new(r, b, w);
                let i = bounds.index(state).expect("in bounds");
                evaluated += 1;
                if state.is_terminal() {
                    values[i] = reward.terminal_value(state);
                    continue;
                }
                let q = BattingAction::ALL.map(|a| {
                    lookahead(model, reward, state, a, |s| {
                        values[bounds.index(s).expect("successor in bounds")]
                    })
                });
                let best = argmax(&q);
                values[i] = q[best];
                actions[i] = Some(BattingAction::ALL[best]);
            }
        }
    }
    Ok(ChaseSolution {
        values: ValueTable::from_vec(bounds, values),
        policy: PolicyTable::from_vec(bounds, actions),
        report: SolveReport {
            states_evaluated: evaluated,
            sweeps: 1,
            max_residual: 0.0,
            converged: true,
            residuals: Vec::new(),
        },
    })
}

/// Value of following `policy` from every state in its bounds: the
/// Markov-chain win probability when the reward spec is {1, 0, 0}.
pub fn evaluate_policy(
    model: &TransitionModel,
    reward: &RewardSpec,
    policy: &PolicyTable,
) -> Result<ValueTable> {
    reward.validate()?;
    let bounds = policy.bounds();
    bounds.validate()?;
    let mut values = vec![0.0; bounds.len()];
    for b in 0..=bounds.max_balls {
        for r in 0..=bounds.max_runs {
            for w in 0..=bounds.max_wickets {
                let state = MatchState::new(r, b, w);
                let i = bounds.index(state).expect("in bounds");
                values[i] = if state.is_terminal() {
                    reward.terminal_value(state)
                } else {
                    let action = policy.get(state).ok_or(Error::PolicyGap(state))?;
                    lookahead(model, reward, state, action, |s| {
                        values[bounds.index(s).expect("successor in bounds")]
                    })
                };
            }
        }
    }
    Ok(ValueTable::from_vec(bounds, values))
}

/// All five actions ranked by one-step lookahead value, best first; exact
/// ties keep aggression order.
pub fn recommend(
    values: &ValueTable,
    model: &TransitionModel,
    reward: &RewardSpec,
    state: MatchState,
) -> Result<Vec<ActionValue>> {
    Ok(rank_actions(action_values(values, model, reward, state)?))
}

/// Encodes the chase as a generic [`MdpInstance`] with states labelled
/// `"r,b,w"` in table order, so `value_iterate` can cross-check
/// [`solve_chase`].
pub fn chase_as_mdp(
    model: &TransitionModel,
    reward: &RewardSpec,
    bounds: Bounds,
) -> Result<MdpInstance> {
    reward.validate()?;
    bounds.validate()?;
    let labels = BattingAction::ALL.iter().map(|a| a.name().to_string()).collect();
    let mut builder = MdpBuilder::new(labels, 1.0, Horizon::Finite(bounds.max_balls));
    for state in bounds.states() {
        let i = builder.add_state(state.to_string());
        if state.is_terminal() {
            builder.set_absorbing(i, reward.terminal_value(state));
            continue;
        }
        for action in BattingAction::ALL {
            let succ = model
                .row_at(action, state)
                .iter()
                .filter(|&(_, p)| p > 0.0)
                .map(|(o, p)| {
                    let next = bounds.index(state.successor(o)).expect("successor in bounds");
                    Transition::new(next, p, -reward.step_penalty(o))
                })
                .collect();
            builder.set_transitions(i, action.index(), succ);
        }
    }
    builder.build()
}
