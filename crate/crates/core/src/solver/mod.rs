//! Exact planning: backward induction for the chase, fixed-policy
//! evaluation, action recommendations, and discounted value iteration for
//! generic [`MdpInstance`](crate::mdp::MdpInstance)s.

mod chase;
mod tables;
mod value_iteration;

use serde::{Deserialize, Serialize};

use crate::model::BattingAction;

pub use chase::{
    action_values, chase_as_mdp, evaluate_policy, recommend, solve_chase, ChaseSolution,
};
pub(crate) use chase::argmax;
pub use tables::{ChaseTablesDocument, PolicyTable, TableEntry, ValueTable};
pub use value_iteration::{value_iterate, MdpSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub states_evaluated: usize,
    pub sweeps: usize,
    /// Last sweep's largest per-state change (zero for backward induction).
    pub max_residual: f64,
    pub converged: bool,
    /// Per-sweep residuals (value iteration only).
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    pub action: BattingAction,
    pub value: f64,
}

/// Sorts action values best first. The sort is stable and starts from
/// aggression order, so exact ties keep the less aggressive action first.
pub fn rank_actions(values: [f64; BattingAction::COUNT]) -> Vec<ActionValue> {
    let mut ranked: Vec<ActionValue> = BattingAction::ALL
        .into_iter()
        .zip(values)
        .map(|(action, value)| ActionValue { action, value })
        .collect();
    ranked.sort_by(|a, b| b.value.total_cmp(&a.value));
    ranked
}
