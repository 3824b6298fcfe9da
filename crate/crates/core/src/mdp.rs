//! Generic finite MDP used by value iteration and the transfer domains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub next: usize,
    pub probability: f64,
    pub reward: f64,
}

impl Transition {
    pub fn new(next: usize, probability: f64, reward: f64) -> Self {
        Self {
            next,
            probability,
            reward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    /// Every trajectory is absorbed within this many steps.
    Finite(u32),
    Unbounded,
}

/// Finite MDP with labelled states and actions.
///
/// Absorbing states carry a fixed value (their absorption reward, counted
/// once). Every other state lists a probability-weighted successor set for
/// every action; rewards are attached to `(state, action, successor)`.
#[derive(Debug, Clone)]
pub struct MdpInstance {
    state_labels: Vec<String>,
    action_labels: Vec<String>,
    absorbing: Vec<Option<f64>>,
    transitions: Vec<Vec<Vec<Transition>>>,
    discount: f64,
    horizon: Horizon,
}

impl MdpInstance {
    pub fn states(&self) -> &[String] {
        &self.state_labels
    }

    pub fn actions(&self) -> &[String] {
        &self.action_labels
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn absorbing_value(&self, state: usize) -> Option<f64> {
        self.absorbing[state]
    }

    /// Successors of `(state, action)`; empty for absorbing states.
    pub fn transitions(&self, state: usize, action: usize) -> &[Transition] {
        self.transitions[state]
            .get(action)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.state_labels.iter().position(|l| l == label)
    }

    /// One-step lookahead value of every action at a non-absorbing state.
    pub fn action_values(&self, state: usize, values: &[f64]) -> Vec<f64> {
        self.transitions[state]
            .iter()
            .map(|succ| {
                succ.iter()
                    .map(|t| t.probability * (t.reward + self.discount * values[t.next]))
                    .sum()
            })
            .collect()
    }
}

/// Incremental constructor for [`MdpInstance`].
#[derive(Debug, Clone)]
pub struct MdpBuilder {
    state_labels: Vec<String>,
    action_labels: Vec<String>,
    absorbing: Vec<Option<f64>>,
    transitions: Vec<Vec<Vec<Transition>>>,
    discount: f64,
    horizon: Horizon,
}

impl MdpBuilder {
    pub fn new(actions: Vec<String>, discount: f64, horizon: Horizon) -> Self {
        Self {
            state_labels: Vec::new(),
            action_labels: actions,
            absorbing: Vec::new(),
            transitions: Vec::new(),
            discount,
            horizon,
        }
    }

    pub fn add_state(&mut self, label: impl Into<String>) -> usize {
        self.state_labels.push(label.into());
        self.absorbing.push(None);
        self.transitions.push(Vec::new());
        self.state_labels.len() - 1
    }

    pub fn set_absorbing(&mut self, state: usize, value: f64) {
        self.absorbing[state] = Some(value);
        self.transitions[state].clear();
    }

    pub fn set_transitions(&mut self, state: usize, action: usize, successors: Vec<Transition>) {
        let row = &mut self.transitions[state];
        if row.len() < self.action_labels.len() {
            row.resize(self.action_labels.len(), Vec::new());
        }
        row[action] = successors;
    }

    pub fn build(self) -> Result<MdpInstance> {
        if self.action_labels.is_empty() {
            return Err(Error::InvalidMdp("no actions".into()));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::InvalidMdp(format!(
                "discount {} outside [0, 1]",
                self.discount
            )));
        }
        if self.discount == 1.0 && self.horizon == Horizon::Unbounded {
            return Err(Error::InvalidMdp(
                "undiscounted problems need a finite (absorbing) horizon".into(),
            ));
        }
        let n = self.state_labels.len();
        for s in 0..n {
            if self.absorbing[s].is_some() {
                continue;
            }
            for a in 0..self.action_labels.len() {
                let succ = self.transitions[s].get(a).filter(|v| !v.is_empty()).ok_or_else(|| {
                    Error::InvalidMdp(format!(
                        "state {} has no successors for action {}",
                        self.state_labels[s], self.action_labels[a]
                    ))
                })?;
                let mut total = 0.0;
                for t in succ {
                    if t.next >= n {
                        return Err(Error::InvalidMdp(format!(
                            "successor index {} out of range",
                            t.next
                        )));
                    }
                    if !(t.probability >= 0.0) || !t.reward.is_finite() {
                        return Err(Error::InvalidMdp(format!(
                            "bad transition from {} under {}",
                            self.state_labels[s], self.action_labels[a]
                        )));
                    }
                    total += t.probability;
                }
                if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                    return Err(Error::InvalidMdp(format!(
                        "successor probabilities of ({}, {}) sum to {total}",
                        self.state_labels[s], self.action_labels[a]
                    )));
                }
            }
        }
        Ok(MdpInstance {
            state_labels: self.state_labels,
            action_labels: self.action_labels,
            absorbing: self.absorbing,
            transitions: self.transitions,
            discount: self.discount,
            horizon: self.horizon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_actions() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn rejects_probability_leak() {
        let mut b = MdpBuilder::new(two_actions(), 0.9, Horizon::Unbounded);
        let s = b.add_state("s");
        b.set_transitions(s, 0, vec![Transition::new(s, 0.5, 0.0)]);
        b.set_transitions(s, 1, vec![Transition::new(s, 1.0, 0.0)]);
        let err = b.build().unwrap_err().to_string();
        assert!(err.contains("sum to 0.5"), "{err}");
    }

    #[test]
    fn rejects_missing_action() {
        let mut b = MdpBuilder::new(two_actions(), 0.9, Horizon::Unbounded);
        let s = b.add_state("s");
        b.set_transitions(s, 0, vec![Transition::new(s, 1.0, 0.0)]);
        assert!(b.build().is_err());
    }

    #[test]
    fn undiscounted_needs_finite_horizon() {
        let mut b = MdpBuilder::new(two_actions(), 1.0, Horizon::Unbounded);
        let s = b.add_state("s");
        b.set_absorbing(s, 0.0);
        assert!(b.build().is_err());
    }
}
