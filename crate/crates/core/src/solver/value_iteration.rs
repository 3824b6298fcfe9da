use crate::error::{Error, Result};
use crate::mdp::MdpInstance;

use super::chase::argmax;
use super::SolveReport;

#[derive(Debug, Clone)]
pub struct MdpSolution {
    pub values: Vec<f64>,
    /// Greedy action index per state; `None` for absorbing states.
    pub policy: Vec<Option<usize>>,
    pub report: SolveReport,
}

impl MdpSolution {
    pub fn value_of(&self, mdp: &MdpInstance, label: &str) -> Option<f64> {
        mdp.state_index(label).map(|i| self.values[i])
    }

    pub fn action_of<'a>(&self, mdp: &'a MdpInstance, label: &str) -> Option<&'a str> {
        mdp.state_index(label)
            .and_then(|i| self.policy[i])
            .map(|a| mdp.actions()[a].as_str())
    }
}

/// Synchronous value iteration.
///
/// Absorbing states hold their absorption value; all others start at zero.
/// Sweeps stop once the largest per-state change drops below `tolerance`
/// or after `max_sweeps`; the latter is reported through
/// `report.converged = false` rather than an error. The greedy policy is
/// extracted from the final values with lowest-index tie-breaking.
pub fn value_iterate(mdp: &MdpInstance, tolerance: f64, max_sweeps: usize) -> Result<MdpSolution> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let n = mdp.states().len();
    let mut values: Vec<f64> = (0..n).map(|s| mdp.absorbing_value(s).unwrap_or(0.0)).collect();
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let next: Vec<f64> = (0..n)
            .map(|s| match mdp.absorbing_value(s) {
                Some(v) => v,
                None => {
                    let q = mdp.action_values(s, &values);
                    q[argmax(&q)]
                }
            })
            .collect();
        let residual = values
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        residuals.push(residual);
        sweeps += 1;
        if residual < tolerance {
            converged = true;
            break;
        }
    }
    let policy = (0..n)
        .map(|s| {
            mdp.absorbing_value(s)
                .is_none()
                .then(|| argmax(&mdp.action_values(s, &values)))
        })
        .collect();
    Ok(MdpSolution {
        values,
        policy,
        report: SolveReport {
            states_evaluated: n * sweeps,
            sweeps,
            max_residual: residuals.last().copied().unwrap_or(f64::INFINITY),
            converged,
            residuals,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{Horizon, MdpBuilder, Transition};

    #[test]
    fn single_absorbing_state() {
        let mut b = MdpBuilder::new(vec!["stay".into()], 0.9, Horizon::Unbounded);
        let s = b.add_state("only");
        b.set_absorbing(s, 0.0);
        let sol = value_iterate(&b.build().unwrap(), 1e-12, 10).unwrap();
        assert_eq!(sol.values, vec![0.0]);
        assert!(sol.report.converged);
        assert_eq!(sol.policy, vec![None]);
    }

    #[test]
    fn two_state_chain() {
        // pre -> absorb deterministically; the absorbing state is worth its
        // reward of 1 once, so pre is worth 0.9 * 1.
        let mut b = MdpBuilder::new(vec!["go".into()], 0.9, Horizon::Finite(1));
        let pre = b.add_state("pre");
        let absorb = b.add_state("absorb");
        b.set_absorbing(absorb, 1.0);
        b.set_transitions(pre, 0, vec![Transition::new(absorb, 1.0, 0.0)]);
        let mdp = b.build().unwrap();
        let sol = value_iterate(&mdp, 1e-12, 100).unwrap();
        let geometric = 0.9f64.powi(1) * 1.0;
        assert!((sol.value_of(&mdp, "pre").unwrap() - geometric).abs() < 1e-15);
        assert_eq!(sol.value_of(&mdp, "absorb"), Some(1.0));
        assert_eq!(sol.action_of(&mdp, "pre"), Some("go"));
    }

    #[test]
    fn non_convergence_is_flagged_not_fatal() {
        // self-loop paying 1 per step: V = 1 / (1 - 0.99) = 100
        let mut b = MdpBuilder::new(vec!["loop".into()], 0.99, Horizon::Unbounded);
        let s = b.add_state("s");
        b.set_transitions(s, 0, vec![Transition::new(s, 1.0, 1.0)]);
        let mdp = b.build().unwrap();
        let sol = value_iterate(&mdp, 1e-9, 5).unwrap();
        assert!(!sol.report.converged);
        assert_eq!(sol.report.sweeps, 5);
        let full = value_iterate(&mdp, 1e-9, 10_000).unwrap();
        assert!(full.report.converged);
        assert!((full.values[0] - 100.0).abs() < 1e-6);
    }

    #[test]
    fn residuals_shrink_under_discounting() {
        let mut b = MdpBuilder::new(vec!["a".into(), "b".into()], 0.8, Horizon::Unbounded);
        let x = b.add_state("x");
        let y = b.add_state("y");
        b.set_transitions(x, 0, vec![Transition::new(y, 0.7, 1.0), Transition::new(x, 0.3, 0.0)]);
        b.set_transitions(x, 1, vec![Transition::new(x, 1.0, 0.5)]);
        b.set_transitions(y, 0, vec![Transition::new(x, 1.0, -1.0)]);
        b.set_transitions(y, 1, vec![Transition::new(y, 0.5, 2.0), Transition::new(x, 0.5, 0.0)]);
        let sol = value_iterate(&b.build().unwrap(), 1e-12, 1000).unwrap();
        assert!(sol.report.converged);
        let r = &sol.report.residuals;
        assert!(r.windows(2).skip(1).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let mut b = MdpBuilder::new(vec!["a".into()], 0.5, Horizon::Unbounded);
        let s = b.add_state("s");
        b.set_absorbing(s, 0.0);
        assert!(value_iterate(&b.build().unwrap(), 0.0, 10).is_err());
    }
}
