//! Bernoulli multi-armed bandits for bowler selection: arm bookkeeping,
//! selection rules and pseudo-regret simulation.
//!
//! A run uses one SplitMix64 stream: the selection rule draws first (as
//! many uniforms as it needs), then one uniform decides the reward.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::doc::format_fixed12;
use crate::error::{Error, Result};
use crate::sim::{rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmState {
    pub pulls: u64,
    pub successes: u64,
}

impl ArmState {
    /// successes / pulls, or 0 before the first pull.
    pub fn mean_estimate(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.successes as f64 / self.pulls as f64
        }
    }

    pub fn failures(&self) -> u64 {
        self.pulls - self.successes
    }

    pub fn record(&mut self, success: bool) {
        self.pulls += 1;
        self.successes += success as u64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditInstance {
    true_means: Vec<f64>,
    horizon: u64,
}

impl BanditInstance {
    pub fn new(true_means: Vec<f64>, horizon: u64) -> Result<Self> {
        if true_means.len() < 2 {
            return Err(Error::InvalidBandit("at least two arms are required".into()));
        }
        if let Some(m) = true_means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::InvalidBandit(format!("arm mean {m} outside [0, 1]")));
        }
        if horizon == 0 {
            return Err(Error::InvalidBandit("horizon must be at least 1".into()));
        }
        Ok(Self {
            true_means,
            horizon,
        })
    }

    pub fn true_means(&self) -> &[f64] {
        &self.true_means
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn best_mean(&self) -> f64 {
        self.true_means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn first_unpulled(arms: &[ArmState]) -> Option<usize> {
    arms.iter().position(|a| a.pulls == 0)
}

fn argmax_by(n: usize, score: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    for i in 1..n {
        if score(i) > score(best) {
            best = i;
        }
    }
    best
}

/// Unpulled arms first, by index; then uniform with probability
/// `epsilon`, otherwise the best mean estimate (lowest index on ties).
pub fn select_epsilon_greedy<R: Rng + ?Sized>(arms: &[ArmState], epsilon: f64, rng: &mut R) -> usize {
    if let Some(i) = first_unpulled(arms) {
        return i;
    }
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..arms.len())
    } else {
        argmax_by(arms.len(), |i| arms[i].mean_estimate())
    }
}

/// Selection probabilities proportional to `exp(mean / temperature)`,
/// after the same round-robin initialization as epsilon-greedy.
pub fn softmax_probabilities(arms: &[ArmState], temperature: f64) -> Vec<f64> {
    let max = arms.iter().map(ArmState::mean_estimate).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = arms
        .iter()
        .map(|a| ((a.mean_estimate() - max) / temperature).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

pub fn select_softmax<R: Rng + ?Sized>(arms: &[ArmState], temperature: f64, rng: &mut R) -> usize {
    if let Some(i) = first_unpulled(arms) {
        return i;
    }
    let probs = softmax_probabilities(arms, temperature);
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// UCB1 index `mean + sqrt(2 ln t / pulls)`.
pub fn ucb1_scores(arms: &[ArmState], t: u64) -> Vec<f64> {
    arms.iter()
        .map(|a| a.mean_estimate() + (2.0 * (t as f64).ln() / a.pulls as f64).sqrt())
        .collect()
}

/// Unpulled arms first, by index; then the highest UCB1 index with
/// `t` the total pulls so far.
pub fn select_ucb1(arms: &[ArmState], t: u64) -> usize {
    if let Some(i) = first_unpulled(arms) {
        return i;
    }
    let scores = ucb1_scores(arms, t);
    argmax_by(arms.len(), |i| scores[i])
}

/// One draw from each arm's Beta(1 + successes, 1 + failures) posterior;
/// the largest draw wins.
pub fn select_thompson<R: Rng + ?Sized>(arms: &[ArmState], rng: &mut R) -> usize {
    let draws: Vec<f64> = arms
        .iter()
        .map(|a| {
            Beta::new(1.0 + a.successes as f64, 1.0 + a.failures() as f64)
                .expect("Beta parameters are at least 1")
                .sample(rng)
        })
        .collect();
    argmax_by(arms.len(), |i| draws[i])
}

/// Anything that picks an arm from the public arm statistics.
pub trait ArmSelector {
    fn select(&mut self, arms: &[ArmState], t: u64, rng: &mut SimRng) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum BanditPolicy {
    EpsilonGreedy { epsilon: f64 },
    Softmax { temperature: f64 },
    Ucb1,
    Thompson,
    Uniform,
}

impl BanditPolicy {
    pub const NAMES: [&'static str; 5] = ["epsilon-greedy", "softmax", "ucb1", "thompson", "uniform"];

    pub fn name(&self) -> &'static str {
        match self {
            BanditPolicy::EpsilonGreedy { .. } => "epsilon-greedy",
            BanditPolicy::Softmax { .. } => "softmax",
            BanditPolicy::Ucb1 => "ucb1",
            BanditPolicy::Thompson => "thompson",
            BanditPolicy::Uniform => "uniform",
        }
    }

    /// Builds a policy from its name. `param` is epsilon (default 0.1) or
    /// temperature (default 0.1) and is ignored by the other rules.
    pub fn from_name(name: &str, param: Option<f64>) -> Result<Self> {
        let p = match name {
            "epsilon-greedy" => BanditPolicy::EpsilonGreedy {
                epsilon: param.unwrap_or(0.1),
            },
            "softmax" => BanditPolicy::Softmax {
                temperature: param.unwrap_or(0.1),
            },
            "ucb1" => BanditPolicy::Ucb1,
            "thompson" => BanditPolicy::Thompson,
            "uniform" => BanditPolicy::Uniform,
            other => return Err(Error::UnknownPolicy(other.to_string())),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BanditPolicy::EpsilonGreedy { epsilon } if !(0.0..=1.0).contains(&epsilon) => Err(
                Error::InvalidBandit(format!("epsilon {epsilon} outside [0, 1]")),
            ),
            BanditPolicy::Softmax { temperature } if !(temperature > 0.0) => Err(
                Error::InvalidBandit(format!("temperature must be positive, got {temperature}")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BanditPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BanditPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BanditPolicy::from_name(s, None)
    }
}

impl ArmSelector for BanditPolicy {
    fn select(&mut self, arms: &[ArmState], t: u64, rng: &mut SimRng) -> usize {
        match *self {
            BanditPolicy::EpsilonGreedy { epsilon } => select_epsilon_greedy(arms, epsilon, rng),
            BanditPolicy::Softmax { temperature } => select_softmax(arms, temperature, rng),
            BanditPolicy::Ucb1 => select_ucb1(arms, t),
            BanditPolicy::Thompson => select_thompson(arms, rng),
            BanditPolicy::Uniform => rng.random_range(0..arms.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub selections: Vec<usize>,
    pub rewards: Vec<u8>,
    /// After each step: best mean times steps minus the summed means of
    /// the arms pulled, accumulated one non-negative gap at a time.
    pub cumulative_pseudo_regret: Vec<f64>,
    pub arms: Vec<ArmState>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cumulative_pseudo_regret.last().copied().unwrap_or(0.0)
    }

    /// `step,arm,reward,cumulative_pseudo_regret`, steps counted from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,arm,reward,cumulative_pseudo_regret\n");
        for (i, ((a, r), g)) in self
            .selections
            .iter()
            .zip(&self.rewards)
            .zip(&self.cumulative_pseudo_regret)
            .enumerate()
        {
            out.push_str(&format!("{},{a},{r},{}\n", i + 1, format_fixed12(*g)));
        }
        out
    }
}

pub fn run_with_selector(
    instance: &BanditInstance,
    selector: &mut dyn ArmSelector,
    seed: u64,
) -> RegretTrace {
    let k = instance.true_means.len();
    let best = instance.best_mean();
    let n = instance.horizon as usize;
    let mut rng = rng_from_seed(seed);
    let mut arms = vec![ArmState::default(); k];
    let mut trace = RegretTrace {
        selections: Vec::with_capacity(n),
        rewards: Vec::with_capacity(n),
        cumulative_pseudo_regret: Vec::with_capacity(n),
        arms: Vec::new(),
    };
    let mut regret = 0.0;
    for t in 0..instance.horizon {
        let a = selector.select(&arms, t, &mut rng);
        let success = rng.random::<f64>() < instance.true_means[a];
        arms[a].record(success);
        regret += best - instance.true_means[a];
        trace.selections.push(a);
        trace.rewards.push(success as u8);
        trace.cumulative_pseudo_regret.push(regret);
    }
    trace.arms = arms;
    trace
}

pub fn run_bandit_sim(instance: &BanditInstance, policy: &BanditPolicy, seed: u64) -> Result<RegretTrace> {
    policy.validate()?;
    let mut p = *policy;
    Ok(run_with_selector(instance, &mut p, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arms(stats: &[(u64, u64)]) -> Vec<ArmState> {
        stats
            .iter()
            .map(|&(pulls, successes)| ArmState { pulls, successes })
            .collect()
    }

    #[test]
    fn pure_exploitation_and_forced_init() {
        let mut rng = rng_from_seed(0);
        let a = arms(&[(10, 2), (10, 7)]);
        for _ in 0..100 {
            assert_eq!(select_epsilon_greedy(&a, 0.0, &mut rng), 1);
        }
        let b = arms(&[(10, 2), (0, 0), (4, 4)]);
        assert_eq!(select_epsilon_greedy(&b, 1.0, &mut rng), 1);
        assert_eq!(select_softmax(&b, 0.5, &mut rng), 1);
        assert_eq!(select_ucb1(&b, 14), 1);
    }

    #[test]
    fn ucb1_bonus_formula() {
        let a = arms(&[(5, 4), (5, 0)]);
        let s = ucb1_scores(&a, 10);
        let bonus = (2.0 * 10f64.ln() / 5.0).sqrt();
        assert!((bonus - 0.959_705_182).abs() < 1e-9);
        assert!((s[0] - (0.8 + bonus)).abs() < 1e-15);
        assert_eq!(select_ucb1(&a, 10), 0);
        let tie = arms(&[(5, 3), (5, 3)]);
        assert_eq!(select_ucb1(&tie, 10), 0);
    }

    #[test]
    fn softmax_cold_limit_is_argmax() {
        let a = arms(&[(10, 3), (10, 8), (10, 5)]);
        let p = softmax_probabilities(&a, 1e-9);
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
        let even = softmax_probabilities(&arms(&[(4, 2), (6, 3)]), 0.7);
        assert_eq!(even, vec![0.5, 0.5]);
    }

    #[test]
    fn unknown_policy_is_an_error() {
        assert!(matches!(
            BanditPolicy::from_name("greedy-ish", None),
            Err(Error::UnknownPolicy(_))
        ));
        for name in BanditPolicy::NAMES {
            assert_eq!(BanditPolicy::from_name(name, None).unwrap().name(), name);
        }
        assert!(BanditPolicy::from_name("epsilon-greedy", Some(1.5)).is_err());
    }

    #[test]
    fn instance_validation() {
        assert!(BanditInstance::new(vec![0.5], 10).is_err());
        assert!(BanditInstance::new(vec![0.5, 1.2], 10).is_err());
        assert!(BanditInstance::new(vec![0.5, 0.2], 0).is_err());
    }

    #[test]
    fn csv_export() {
        let inst = BanditInstance::new(vec![0.2, 0.9], 3).unwrap();
        let t = run_bandit_sim(&inst, &BanditPolicy::Ucb1, 1).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,0,"));
        assert!(lines[1].ends_with(",0.700000000000"));
    }
}
