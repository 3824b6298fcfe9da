//! Tabular model-free learning on the simulated chase: Q-learning, SARSA,
//! first-visit Monte Carlo and TD(0) policy evaluation.
//!
//! A learning run consumes one SplitMix64 stream seeded with
//! `config.seed`. Per step the behaviour policy draws one uniform to decide
//! whether to explore and, only when exploring, one more to pick the
//! action; the simulator then draws one uniform for the outcome. Q-learning
//! and SARSA draw the next action the same way, so with `epsilon = 0` both
//! consume identical random streams.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::doc::{self, fixed12, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::model::{BallOutcome, BattingAction, Bounds, MatchState, RewardSpec, TransitionModel};
use crate::sim::{rng_from_seed, simulate_ball, SimRng};
use crate::solver::{action_values, argmax, evaluate_policy, PolicyTable, ValueTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StartRule {
    Fixed { state: MatchState },
    /// Uniform over the non-terminal states in bounds; control methods
    /// also take the first action uniformly at random.
    ExploringStarts,
}

/// Simulated chase as seen by a learner: only sampled transitions and
/// rewards are exposed.
#[derive(Debug, Clone)]
pub struct ChaseEnv {
    model: TransitionModel,
    reward: RewardSpec,
    bounds: Bounds,
    start: StartRule,
    live: Vec<MatchState>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvStep {
    pub outcome: BallOutcome,
    pub next: MatchState,
    pub reward: f64,
    pub done: bool,
}

impl ChaseEnv {
    pub fn new(
        model: TransitionModel,
        reward: RewardSpec,
        bounds: Bounds,
        start: StartRule,
    ) -> Result<Self> {
        reward.validate()?;
        bounds.validate()?;
        if let StartRule::Fixed { state } = start {
            if !bounds.contains(state) {
                return Err(Error::OutOfBounds { state, bounds });
            }
            if state.is_terminal() {
                return Err(Error::TerminalState {
                    state,
                    status: state.status(),
                });
            }
        }
        let live = bounds.non_terminal_states().collect();
        Ok(Self {
            model,
            reward,
            bounds,
            start,
            live,
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn model(&self) -> &TransitionModel {
        &self.model
    }

    pub fn reward_spec(&self) -> &RewardSpec {
        &self.reward
    }

    /// State whose greedy-policy value is reported on learning curves.
    pub fn reference_start(&self) -> MatchState {
        match self.start {
            StartRule::Fixed { state } => state,
            StartRule::ExploringStarts => self.bounds.top(),
        }
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> MatchState {
        match self.start {
            StartRule::Fixed { state } => state,
            StartRule::ExploringStarts => self.live[rng.random_range(0..self.live.len())],
        }
    }

    /// One delivery. The reward is the wicket penalty on WICKET plus the
    /// terminal payoff when the chase ends.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: MatchState,
        action: BattingAction,
        rng: &mut R,
    ) -> Result<EnvStep> {
        let (outcome, next) = simulate_ball(state, action, &self.model, rng)?;
        let done = next.is_terminal();
        let mut reward = -self.reward.step_penalty(outcome);
        if done {
            reward += self.reward.terminal_value(next);
        }
        Ok(EnvStep {
            outcome,
            next,
            reward,
            done,
        })
    }
}

/// Step-size or exploration schedule, a pure function of the episode index
/// (and, for `Visit`, of the entry's prior update count).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Schedule {
    Constant { value: f64 },
    /// Linear from `start` to `end` over the first `fraction` of episodes,
    /// then held at `end`.
    Linear { start: f64, end: f64, fraction: f64 },
    /// `c / (c + n)` where `n` counts earlier updates of the same entry.
    Visit { c: f64 },
}

impl Schedule {
    pub fn value(&self, episode: u64, episodes: u64, visits: u64) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Linear {
                start,
                end,
                fraction,
            } => {
                let span = fraction * episodes as f64;
                if span <= 0.0 || episode as f64 >= span {
                    end
                } else {
                    start + (end - start) * (episode as f64 / span)
                }
            }
            Schedule::Visit { c } => c / (c + visits as f64),
        }
    }

    fn check(&self, name: &str, lo: f64, lo_open: bool) -> Result<()> {
        let ok = |x: f64| x <= 1.0 && if lo_open { x > lo } else { x >= lo };
        let valid = match *self {
            Schedule::Constant { value } => ok(value),
            Schedule::Linear {
                start,
                end,
                fraction,
            } => ok(start) && ok(end) && (0.0..=1.0).contains(&fraction),
            Schedule::Visit { c } => c > 0.0 && c.is_finite(),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{name} schedule {self:?} out of range")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub episodes: u64,
    pub learning_rate: Schedule,
    pub epsilon: Schedule,
    pub discount: f64,
    pub initial_q: f64,
    pub seed: u64,
    /// Curve checkpoint spacing in episodes; 0 records only the ends.
    pub checkpoint_every: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            episodes: 100_000,
            learning_rate: Schedule::Visit { c: 100.0 },
            epsilon: Schedule::Linear {
                start: 0.3,
                end: 0.01,
                fraction: 0.8,
            },
            discount: 1.0,
            initial_q: 0.5,
            seed: 0,
            checkpoint_every: 0,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        self.learning_rate.check("learning_rate", 0.0, true)?;
        self.epsilon.check("epsilon", 0.0, false)?;
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "discount must lie in (0, 1], got {}",
                self.discount
            )));
        }
        if !self.initial_q.is_finite() {
            return Err(Error::InvalidParams("initial_q must be finite".into()));
        }
        Ok(())
    }
}

/// Dense action-value table with per-entry update counts.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    bounds: Bounds,
    initial_q: f64,
    values: Vec<[f64; BattingAction::COUNT]>,
    visits: Vec<[u64; BattingAction::COUNT]>,
}

impl QTable {
    pub fn new(bounds: Bounds, initial_q: f64) -> Self {
        Self {
            bounds,
            initial_q,
            values: vec![[initial_q; BattingAction::COUNT]; bounds.len()],
            visits: vec![[0; BattingAction::COUNT]; bounds.len()],
        }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn initial_q(&self) -> f64 {
        self.initial_q
    }

    fn idx(&self, state: MatchState) -> usize {
        self.bounds.index(state).expect("state within Q-table bounds")
    }

    pub fn get(&self, state: MatchState, action: BattingAction) -> Option<f64> {
        self.bounds.index(state).map(|i| self.values[i][action.index()])
    }

    pub fn visits(&self, state: MatchState, action: BattingAction) -> Option<u64> {
        self.bounds.index(state).map(|i| self.visits[i][action.index()])
    }

    pub fn row(&self, state: MatchState) -> Option<&[f64; BattingAction::COUNT]> {
        self.bounds.index(state).map(|i| &self.values[i])
    }

    pub fn set(&mut self, state: MatchState, action: BattingAction, value: f64) {
        let i = self.idx(state);
        self.values[i][action.index()] = value;
    }

    /// Greedy value at a live state; 0 at terminal states, whose payoff is
    /// paid as the reward on entry.
    fn bootstrap_max(&self, state: MatchState) -> f64 {
        let row = &self.values[self.idx(state)];
        row[argmax(row)]
    }

    fn greedy(&self, state: MatchState) -> BattingAction {
        BattingAction::ALL[argmax(&self.values[self.idx(state)])]
    }

    fn update(&mut self, state: MatchState, action: BattingAction, target: f64, alpha: f64) {
        let i = self.idx(state);
        let a = action.index();
        self.values[i][a] += alpha * (target - self.values[i][a]);
        self.visits[i][a] += 1;
    }

    /// Entries for every live state, in table order then aggression order.
    pub fn entries(&self) -> impl Iterator<Item = (MatchState, BattingAction, f64, u64)> + '_ {
        self.bounds
            .states()
            .zip(self.values.iter().zip(&self.visits))
            .filter(|(s, _)| !s.is_terminal())
            .flat_map(|(s, (q, n))| {
                BattingAction::ALL
                    .into_iter()
                    .map(move |a| (s, a, q[a.index()], n[a.index()]))
            })
    }

    pub fn to_document_string(&self) -> Result<String> {
        let entries: Vec<(String, QEntry)> = self
            .entries()
            .map(|(s, a, value, visits)| (format!("{s},{a}"), QEntry { value, visits }))
            .collect();
        doc::to_document(&QTableDocument {
            schema_version: SCHEMA_VERSION,
            bounds: self.bounds,
            initial_q: self.initial_q,
            entries: OrderedEntries(entries),
        })
    }

    pub fn from_document_str(text: &str) -> Result<Self> {
        let d: QTableParsed = doc::from_document(text)?;
        d.bounds.validate()?;
        let mut q = QTable::new(d.bounds, d.initial_q);
        for (key, e) in d.entries {
            let (state, action) = key
                .rsplit_once(',')
                .ok_or_else(|| Error::InvalidParams(format!("bad Q entry key {key:?}")))?;
            let state: MatchState = state.parse().map_err(Error::InvalidParams)?;
            let action: BattingAction = action.parse().map_err(Error::InvalidParams)?;
            let i = d.bounds.index(state).ok_or(Error::OutOfBounds {
                state,
                bounds: d.bounds,
            })?;
            q.values[i][action.index()] = e.value;
            q.visits[i][action.index()] = e.visits;
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QEntry {
    #[serde(serialize_with = "fixed12")]
    value: f64,
    visits: u64,
}

#[derive(Debug)]
struct OrderedEntries(Vec<(String, QEntry)>);

impl Serialize for OrderedEntries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct QTableDocument {
    schema_version: u32,
    bounds: Bounds,
    #[serde(serialize_with = "fixed12")]
    initial_q: f64,
    entries: OrderedEntries,
}

#[derive(Deserialize)]
struct QTableParsed {
    #[allow(dead_code)]
    schema_version: u32,
    bounds: Bounds,
    initial_q: f64,
    entries: BTreeMap<String, QEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub episode: u64,
    /// Exact win probability of the current greedy policy from the
    /// environment's reference start.
    pub greedy_win_rate: f64,
    /// Largest |Q - Q*| over live entries, when a reference is supplied.
    pub max_q_error: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub checkpoints: Vec<Checkpoint>,
}

impl LearningCurve {
    /// `episode,greedy_win_rate,max_q_error` with a header line; the error
    /// column is empty without a reference.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("episode,greedy_win_rate,max_q_error\n");
        for c in &self.checkpoints {
            let err = c.max_q_error.map(doc::format_fixed12).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{}\n",
                c.episode,
                doc::format_fixed12(c.greedy_win_rate),
                err
            ));
        }
        out
    }
}

/// Per-state argmax with ties to the less aggressive action.
pub fn greedy_policy_from(q: &QTable) -> PolicyTable {
    PolicyTable::from_fn(q.bounds, |s| q.greedy(s))
}

/// How a greedy policy read off a Q table compares with the exact optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyComparison {
    /// Largest |V_greedy(s) - V*(s)| over live states.
    pub max_value_gap: f64,
    /// Live states whose greedy action is optimal (any tied optimum counts).
    pub agreeing_states: usize,
    pub live_states: usize,
}

impl GreedyComparison {
    pub fn agreement(&self) -> f64 {
        self.agreeing_states as f64 / self.live_states as f64
    }
}

/// Compares the greedy policy of `q` with the optimal tables `vstar` of
/// the same model. Actions within `tie_tolerance` of the best lookahead
/// value count as optimal.
pub fn compare_greedy(
    q: &QTable,
    vstar: &ValueTable,
    model: &TransitionModel,
    reward: &RewardSpec,
    tie_tolerance: f64,
) -> Result<GreedyComparison> {
    let policy = greedy_policy_from(q);
    let v = evaluate_policy(model, reward, &policy)?;
    let mut out = GreedyComparison {
        max_value_gap: 0.0,
        agreeing_states: 0,
        live_states: 0,
    };
    for s in q.bounds.non_terminal_states() {
        out.live_states += 1;
        out.max_value_gap = out.max_value_gap.max((v.value(s)? - vstar.value(s)?).abs());
        let qstar = action_values(vstar, model, reward, s)?;
        let best = qstar[argmax(&qstar)];
        let chosen = policy.get(s).ok_or(Error::PolicyGap(s))?;
        if best - qstar[chosen.index()] <= tie_tolerance {
            out.agreeing_states += 1;
        }
    }
    Ok(out)
}

fn checkpoint(
    env: &ChaseEnv,
    q: &QTable,
    episode: u64,
    reference: Option<&ValueTable>,
) -> Result<Checkpoint> {
    let policy = greedy_policy_from(q);
    let v = evaluate_policy(&env.model, &env.reward, &policy)?;
    let max_q_error = match reference {
        None => None,
        Some(vstar) => {
            let mut worst = 0.0f64;
            for s in env.bounds.non_terminal_states() {
                let qstar = action_values(vstar, &env.model, &env.reward, s)?;
                let row = q.row(s).expect("live state in bounds");
                for (a, b) in row.iter().zip(qstar) {
                    worst = worst.max((a - b).abs());
                }
            }
            Some(worst)
        }
    };
    Ok(Checkpoint {
        episode,
        greedy_win_rate: v.value(env.reference_start())?,
        max_q_error,
    })
}

fn behaviour(
    q: &QTable,
    state: MatchState,
    epsilon: f64,
    rng: &mut SimRng,
) -> BattingAction {
    if rng.random::<f64>() < epsilon {
        BattingAction::ALL[rng.random_range(0..BattingAction::COUNT)]
    } else {
        q.greedy(state)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    OffPolicy,
    OnPolicy,
}

fn control(
    env: &ChaseEnv,
    config: &LearnConfig,
    reference: Option<&ValueTable>,
    target: Target,
) -> Result<(QTable, LearningCurve)> {
    config.validate()?;
    if let Some(r) = reference {
        if r.bounds() != env.bounds {
            return Err(Error::InvalidBounds(format!(
                "reference bounds {} differ from environment bounds {}",
                r.bounds(),
                env.bounds
            )));
        }
    }
    let mut rng = rng_from_seed(config.seed);
    let mut q = QTable::new(env.bounds, config.initial_q);
    let mut curve = LearningCurve::default();
    curve.checkpoints.push(checkpoint(env, &q, 0, reference)?);
    for ep in 0..config.episodes {
        let eps = config.epsilon.value(ep, config.episodes, 0);
        let mut s = env.reset(&mut rng);
        let mut a = match env.start {
            StartRule::ExploringStarts => {
                BattingAction::ALL[rng.random_range(0..BattingAction::COUNT)]
            }
            StartRule::Fixed { .. } => behaviour(&q, s, eps, &mut rng),
        };
        loop {
            let step = env.step(s, a, &mut rng)?;
            let (y, next_a) = if step.done {
                (step.reward, None)
            } else {
                let a2 = behaviour(&q, step.next, eps, &mut rng);
                let boot = match target {
                    Target::OffPolicy => q.bootstrap_max(step.next),
                    Target::OnPolicy => q.values[q.idx(step.next)][a2.index()],
                };
                (step.reward + config.discount * boot, Some(a2))
            };
            let n = q.visits[q.idx(s)][a.index()];
            let alpha = config.learning_rate.value(ep, config.episodes, n);
            q.update(s, a, y, alpha);
            match next_a {
                None => break,
                Some(a2) => {
                    s = step.next;
                    a = a2;
                }
            }
        }
        let done = ep + 1;
        let due = config.checkpoint_every > 0 && done % config.checkpoint_every == 0;
        if due || done == config.episodes {
            curve.checkpoints.push(checkpoint(env, &q, done, reference)?);
        }
    }
    Ok((q, curve))
}

/// Off-policy control: target `reward + discount * max_a' Q(s', a')`.
pub fn q_learn(
    env: &ChaseEnv,
    config: &LearnConfig,
    reference: Option<&ValueTable>,
) -> Result<(QTable, LearningCurve)> {
    control(env, config, reference, Target::OffPolicy)
}

/// On-policy control: target `reward + discount * Q(s', a')` with `a'` the
/// behaviour policy's next action.
pub fn sarsa(
    env: &ChaseEnv,
    config: &LearnConfig,
    reference: Option<&ValueTable>,
) -> Result<(QTable, LearningCurve)> {
    control(env, config, reference, Target::OnPolicy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateEstimate {
    pub value: f64,
    pub visits: u64,
}

impl StateEstimate {
    /// Standard error of a mean of returns bounded in [0, 1], using the
    /// Bernoulli worst case when only the mean is known.
    pub fn standard_error(&self) -> f64 {
        (self.value * (1.0 - self.value) / self.visits as f64).sqrt()
    }
}

pub type ValueEstimates = BTreeMap<MatchState, StateEstimate>;

fn play_policy(
    env: &ChaseEnv,
    policy: &PolicyTable,
    rng: &mut SimRng,
) -> Result<Vec<(MatchState, EnvStep)>> {
    let mut s = env.reset(rng);
    let mut steps = Vec::new();
    loop {
        let a = policy.get(s).ok_or(Error::PolicyGap(s))?;
        let step = env.step(s, a, rng)?;
        steps.push((s, step));
        if step.done {
            return Ok(steps);
        }
        s = step.next;
    }
}

/// First-visit Monte Carlo evaluation (undiscounted returns). States never
/// visited are absent.
pub fn mc_evaluate(
    env: &ChaseEnv,
    policy: &PolicyTable,
    episodes: u64,
    seed: u64,
) -> Result<ValueEstimates> {
    if episodes == 0 {
        return Err(Error::InvalidParams("episodes must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut sums: BTreeMap<MatchState, (f64, u64)> = BTreeMap::new();
    for _ in 0..episodes {
        let steps = play_policy(env, policy, &mut rng)?;
        let mut g = 0.0;
        // Balls strictly decrease, so each state occurs at most once per
        // episode and every visit is the first.
        for (s, step) in steps.iter().rev() {
            g += step.reward;
            let e = sums.entry(*s).or_insert((0.0, 0));
            e.0 += g;
            e.1 += 1;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(s, (sum, n))| {
            (
                s,
                StateEstimate {
                    value: sum / n as f64,
                    visits: n,
                },
            )
        })
        .collect())
}

/// TD(0): `V(s) += alpha * (reward + discount * V(s') - V(s))` along
/// episodes of the fixed policy, starting from `initial_q` everywhere.
/// Terminal successors bootstrap from 0. Every live state in bounds is
/// reported; unvisited ones keep the initial value with zero visits.
pub fn td_zero_evaluate(
    env: &ChaseEnv,
    policy: &PolicyTable,
    config: &LearnConfig,
) -> Result<ValueEstimates> {
    config.validate()?;
    let bounds = env.bounds;
    let mut v = vec![config.initial_q; bounds.len()];
    let mut n = vec![0u64; bounds.len()];
    let mut rng = rng_from_seed(config.seed);
    for ep in 0..config.episodes {
        let mut s = env.reset(&mut rng);
        loop {
            let a = policy.get(s).ok_or(Error::PolicyGap(s))?;
            let step = env.step(s, a, &mut rng)?;
            let boot = if step.done {
                0.0
            } else {
                v[bounds.index(step.next).expect("successor in bounds")]
            };
            let i = bounds.index(s).expect("state in bounds");
            let alpha = config.learning_rate.value(ep, config.episodes, n[i]);
            v[i] += alpha * (step.reward + config.discount * boot - v[i]);
            n[i] += 1;
            if step.done {
                break;
            }
            s = step.next;
        }
    }
    Ok(bounds
        .states()
        .filter(|s| !s.is_terminal())
        .map(|s| {
            let i = bounds.index(s).expect("in bounds");
            (
                s,
                StateEstimate {
                    value: v[i],
                    visits: n[i],
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OutcomeDistribution;

    fn six_env(bounds: Bounds, start: StartRule) -> ChaseEnv {
        let model = TransitionModel::single_action(OutcomeDistribution::point_mass(BallOutcome::Six));
        ChaseEnv::new(model, RewardSpec::default(), bounds, start).unwrap()
    }

    #[test]
    fn zero_episodes_leave_initial_table() {
        let env = six_env(Bounds::new(3, 2, 1), StartRule::ExploringStarts);
        let cfg = LearnConfig {
            episodes: 0,
            ..LearnConfig::default()
        };
        let (q, curve) = q_learn(&env, &cfg, None).unwrap();
        assert!(q.entries().all(|(_, _, v, n)| v == 0.5 && n == 0));
        assert_eq!(curve.checkpoints.len(), 1);
        let (q2, _) = sarsa(&env, &cfg, None).unwrap();
        assert_eq!(q, q2);
    }

    #[test]
    fn single_full_credit_backup() {
        let env = six_env(Bounds::new(1, 1, 1), StartRule::Fixed { state: MatchState::new(1, 1, 1) });
        let cfg = LearnConfig {
            episodes: 1,
            learning_rate: Schedule::Constant { value: 1.0 },
            epsilon: Schedule::Constant { value: 0.0 },
            ..LearnConfig::default()
        };
        let (q, _) = q_learn(&env, &cfg, None).unwrap();
        let s = MatchState::new(1, 1, 1);
        assert_eq!(q.get(s, BattingAction::UltraDefensive), Some(1.0));
        assert_eq!(q.visits(s, BattingAction::UltraDefensive), Some(1));
        assert_eq!(q.get(s, BattingAction::Defensive), Some(0.5));
    }

    #[test]
    fn visit_schedule_starts_at_one() {
        let s = Schedule::Visit { c: 100.0 };
        assert_eq!(s.value(0, 10, 0), 1.0);
        assert_eq!(s.value(0, 10, 100), 0.5);
        let e = LearnConfig::default().epsilon;
        assert_eq!(e.value(0, 100, 0), 0.3);
        assert!((e.value(40, 100, 0) - 0.155).abs() < 1e-15);
        assert_eq!(e.value(80, 100, 0), 0.01);
        assert_eq!(e.value(99, 100, 0), 0.01);
    }

    #[test]
    fn greedy_ties_go_to_lowest_aggression() {
        let q = QTable::new(Bounds::new(4, 3, 2), 0.25);
        let p = greedy_policy_from(&q);
        assert!(p.iter().all(|(_, a)| a == BattingAction::UltraDefensive));
        let mut q = q;
        q.set(MatchState::new(2, 2, 1), BattingAction::Aggressive, 0.9);
        assert_eq!(greedy_policy_from(&q).get(MatchState::new(2, 2, 1)), Some(BattingAction::Aggressive));
    }

    #[test]
    fn td_alpha_one_single_step() {
        let env = six_env(Bounds::new(5, 3, 1), StartRule::Fixed { state: MatchState::new(5, 3, 1) });
        let policy = PolicyTable::constant(Bounds::new(5, 3, 1), BattingAction::Balanced);
        let cfg = LearnConfig {
            episodes: 1,
            learning_rate: Schedule::Constant { value: 1.0 },
            ..LearnConfig::default()
        };
        let v = td_zero_evaluate(&env, &policy, &cfg).unwrap();
        assert_eq!(v[&MatchState::new(5, 3, 1)].value, 1.0);
        let none = td_zero_evaluate(&env, &policy, &LearnConfig { episodes: 0, ..cfg }).unwrap();
        assert!(none.values().all(|e| e.value == 0.5 && e.visits == 0));
    }

    #[test]
    fn mc_always_win_and_unreachable_states() {
        let bounds = Bounds::new(12, 4, 2);
        let env = six_env(bounds, StartRule::Fixed { state: MatchState::new(12, 4, 2) });
        let policy = PolicyTable::constant(bounds, BattingAction::Balanced);
        let v = mc_evaluate(&env, &policy, 10, 1).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[&MatchState::new(12, 4, 2)].value, 1.0);
        assert_eq!(v[&MatchState::new(6, 3, 2)].value, 1.0);
        assert!(!v.contains_key(&MatchState::new(1, 1, 1)));
    }

    #[test]
    fn q_table_document_round_trip() {
        let env = ChaseEnv::new(
            TransitionModel::default_chase(),
            RewardSpec::default(),
            Bounds::new(4, 3, 2),
            StartRule::ExploringStarts,
        )
        .unwrap();
        let cfg = LearnConfig {
            episodes: 500,
            ..LearnConfig::default()
        };
        let (q, _) = q_learn(&env, &cfg, None).unwrap();
        let text = q.to_document_string().unwrap();
        assert!(text.contains("\"1,1,1,ULTRA_DEFENSIVE\""));
        let back = QTable::from_document_str(&text).unwrap();
        assert_eq!(back.to_document_string().unwrap(), text);
        for (s, a, v, n) in q.entries() {
            assert!((back.get(s, a).unwrap() - v).abs() <= 5e-13);
            assert_eq!(back.visits(s, a), Some(n));
        }
    }

    #[test]
    fn curve_csv_shape() {
        let curve = LearningCurve {
            checkpoints: vec![
                Checkpoint {
                    episode: 0,
                    greedy_win_rate: 0.5,
                    max_q_error: None,
                },
                Checkpoint {
                    episode: 10,
                    greedy_win_rate: 0.65,
                    max_q_error: Some(0.1),
                },
            ],
        };
        assert_eq!(
            curve.to_csv(),
            "episode,greedy_win_rate,max_q_error\n0,0.500000000000,\n10,0.650000000000,0.100000000000\n"
        );
    }
}
