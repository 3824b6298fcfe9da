//! The `chase` command line. Results go to standard output as JSON bodies
//! (or delimited text for traces); diagnostics go to standard error.
//! Exit status is 0 on success, 1 on usage errors and 2 on data or model
//! errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chase_core::bandit::{run_bandit_sim, BanditInstance, BanditPolicy};
use chase_core::bayes::{
    credible_interval, posterior_predictive, update_belief_fold, BeliefSnapshot, BeliefSnapshotDocument,
    NormalBelief, ObservationModel,
};
use chase_core::belief::{qmdp_recommend, solve_pitch_types, update_pitch_belief, Belief, PitchConfig};
use chase_core::doc::{self, fixed12, SCHEMA_VERSION};
use chase_core::ingest::{clean_records, estimate_model, parse_ball_by_ball, CleaningReport, EstimationConfig};
use chase_core::model::{BallOutcome, BattingAction, Bounds, MatchState, RewardSpec, TransitionModel};
use chase_core::rl::{
    compare_greedy, mc_evaluate, q_learn, sarsa, td_zero_evaluate, ChaseEnv, GreedyComparison, LearnConfig,
    Schedule, StartRule, ValueEstimates,
};
use chase_core::sim::simulate_chase;
use chase_core::solver::{evaluate_policy, solve_chase, ActionValue, ChaseTablesDocument, PolicyTable};
use chase_core::transfer::{
    mirrored_bounds, solve_inventory, solve_manufacturing, InventoryParams, ManufacturingParams,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::api::{self, BundleSet};
use crate::bundle::ModelBundle;
use crate::error::AppError;
use crate::server::{self, ServiceState};

#[derive(Debug, Parser)]
#[command(name = "chase", version, about = "Run-chase decision analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a transition model from ball-by-ball records.
    Estimate(EstimateArgs),
    /// Solve the chase exactly and write value/policy tables.
    Solve(SolveArgs),
    /// Rank actions at a state from a bundle.
    Recommend(RecommendArgs),
    /// Monte Carlo rollouts of a bundle's policy, or one-ball stepping.
    Simulate(SimulateArgs),
    /// Model-free learning and policy evaluation.
    Learn(LearnArgs),
    /// Bowler-selection bandit simulation.
    Bandit(BanditArgs),
    /// Pitch-type belief tracking or player ability updating.
    Belief(BeliefArgs),
    /// Manufacturing and inventory MDPs on the same engine.
    Transfer(TransferArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub max_runs: u32,
    #[arg(long)]
    pub max_balls: u32,
    #[arg(long)]
    pub max_wickets: u32,
}

impl BoundsArgs {
    fn bounds(&self) -> Bounds {
        Bounds::new(self.max_runs, self.max_balls, self.max_wickets)
    }
}

#[derive(Debug, Args)]
pub struct RewardArgs {
    #[arg(long, default_value_t = 1.0)]
    pub win_reward: f64,
    #[arg(long, default_value_t = 0.0)]
    pub loss_reward: f64,
    #[arg(long, default_value_t = 0.0)]
    pub wicket_penalty: f64,
}

impl RewardArgs {
    fn spec(&self) -> RewardSpec {
        RewardSpec {
            win_reward: self.win_reward,
            loss_reward: self.loss_reward,
            per_wicket_penalty: self.wicket_penalty,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Ball-by-ball delimited text file.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the model document.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 50)]
    pub min_samples: usize,
    #[arg(long, default_value_t = 120)]
    pub innings_balls: u32,
    #[arg(long, default_value_t = 10)]
    pub squad_wickets: u32,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub bounds: BoundsArgs,
    /// Model document; the built-in default model when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub reward: RewardArgs,
    /// Where to write the value/policy document.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a model bundle for `recommend`, `simulate` and `serve`.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[arg(long)]
    pub bundle_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long, value_parser = parse_state)]
    pub state: MatchState,
    #[arg(long)]
    pub bundle: PathBuf,
    /// Print the per-action outcome breakdown instead of the ranking.
    #[arg(long)]
    pub what_if: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_state)]
    pub state: MatchState,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub episodes: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the ball-by-ball trace of the episode with this seed.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Apply one outcome to the state instead of simulating.
    #[arg(long, value_parser = parse_outcome, conflicts_with_all = ["bundle", "trace"])]
    pub apply: Option<BallOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnAlgo {
    QLearning,
    Sarsa,
    Mc,
    Td,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long, value_enum)]
    pub algo: LearnAlgo,
    #[command(flatten)]
    pub bounds: BoundsArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub reward: RewardArgs,
    #[arg(long, default_value_t = 100_000)]
    pub episodes: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Visit-count learning-rate constant: alpha = c / (c + n).
    #[arg(long, default_value_t = 100.0)]
    pub alpha_c: f64,
    /// Fixed starting state; exploring starts when omitted.
    #[arg(long, value_parser = parse_state)]
    pub start: Option<MatchState>,
    /// Policy evaluated by mc/td: "optimal" or an action name played
    /// everywhere.
    #[arg(long, default_value = "optimal")]
    pub policy: String,
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: u64,
    /// Learning-curve delimited text (control algorithms).
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Q table (control) or value estimates (evaluation) document.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BanditArgs {
    /// True success probabilities, comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub arms: Vec<f64>,
    #[arg(long)]
    pub algo: String,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Regret trace file; printed to standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BeliefArgs {
    #[command(subcommand)]
    pub mode: BeliefMode,
}

#[derive(Debug, Subcommand)]
pub enum BeliefMode {
    /// Track the hidden pitch type through observed deliveries and rank
    /// actions by QMDP.
    Pitch(PitchArgs),
    /// Update a player's ability belief from match scores.
    Player(PlayerArgs),
}

#[derive(Debug, Args)]
pub struct PitchArgs {
    /// Pitch configuration document; GREEN/FLAT/DUSTY when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Starting state; also the solve bounds.
    #[arg(long, value_parser = parse_state)]
    pub state: MatchState,
    /// Deliveries as ACTION:OUTCOME, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub observations: Vec<String>,
    #[command(flatten)]
    pub reward: RewardArgs,
}

#[derive(Debug, Args)]
pub struct PlayerArgs {
    #[arg(long)]
    pub player_id: String,
    /// Prior snapshot document holding this player; overrides the prior
    /// mean and variance flags.
    #[arg(long)]
    pub snapshot_in: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    pub prior_mean: f64,
    #[arg(long, default_value_t = 100.0)]
    pub prior_variance: f64,
    #[arg(long, default_value_t = chase_core::bayes::DEFAULT_OBSERVATION_VARIANCE)]
    pub observation_variance: f64,
    #[arg(long, value_delimiter = ',')]
    pub scores: Vec<f64>,
    #[arg(long, default_value_t = 0.95)]
    pub mass: f64,
    #[arg(long)]
    pub snapshot_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[command(subcommand)]
    pub domain: TransferDomain,
}

#[derive(Debug, Subcommand)]
pub enum TransferDomain {
    /// Units needed / periods / machines scheduling.
    Manufacturing(ManufacturingArgs),
    /// Stock-level control under stochastic demand.
    Inventory(InventoryArgs),
}

#[derive(Debug, Args)]
pub struct ManufacturingArgs {
    /// Parameter document; otherwise rows are copied from `--model`.
    #[arg(long, conflicts_with_all = ["model", "units", "periods", "machines"])]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub units: u32,
    #[arg(long, default_value_t = 30)]
    pub periods: u32,
    #[arg(long, default_value_t = 5)]
    pub machines: u32,
    /// Also solve the mirrored chase and report the largest value gap.
    #[arg(long)]
    pub compare_chase: bool,
    /// Write the parameter document used.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InventoryArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_sweeps: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Bundle documents to load (repeatable).
    #[arg(long = "bundle", required = true)]
    pub bundles: Vec<PathBuf>,
    #[arg(long, env = "CHASE_BIND", default_value = "127.0.0.1")]
    pub bind: IpAddr,
    #[arg(long, env = "CHASE_PORT", default_value_t = 8080)]
    pub port: u16,
}

fn parse_state(s: &str) -> Result<MatchState, String> {
    s.parse()
}

fn parse_outcome(s: &str) -> Result<BallOutcome, String> {
    s.parse()
}

/// Parses `argv` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), AppError> {
    match command {
        Command::Estimate(a) => estimate(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Recommend(a) => recommend(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Learn(a) => learn(a, out),
        Command::Bandit(a) => bandit(a, out),
        Command::Belief(a) => match a.mode {
            BeliefMode::Pitch(p) => pitch(p, out),
            BeliefMode::Player(p) => player(p, out),
        },
        Command::Transfer(a) => match a.domain {
            TransferDomain::Manufacturing(m) => manufacturing(m, out),
            TransferDomain::Inventory(i) => inventory(i, out),
        },
        Command::Serve(a) => serve(a),
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, body: &T) -> Result<(), AppError> {
    out.write_all(api::to_body(body).as_bytes())
        .map_err(|e| AppError::io(Path::new("<stdout>"), e))
}

fn read(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}

fn load_model(path: Option<&Path>) -> Result<TransitionModel, AppError> {
    match path {
        Some(p) => Ok(TransitionModel::from_document_str(&read(p)?)?),
        None => Ok(TransitionModel::default_chase()),
    }
}

fn api_error(e: api::ApiError) -> AppError {
    AppError::Data(e.message)
}

#[derive(Serialize)]
struct EstimateSummary {
    schema_version: u32,
    rows_parsed: usize,
    rows_rejected: usize,
    cleaning: CleaningReport,
    model_sha256: String,
    out: PathBuf,
}

fn estimate(a: EstimateArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let file = std::fs::File::open(&a.input).map_err(|e| AppError::io(&a.input, e))?;
    let (records, issues) = parse_ball_by_ball(std::io::BufReader::new(file))?;
    for issue in &issues {
        log::warn!("{}:{}: {}", a.input.display(), issue.line, issue.reason);
    }
    let (clean, report) = clean_records(&records);
    let config = EstimationConfig {
        smoothing_alpha: a.alpha,
        min_samples: a.min_samples,
    };
    let model = estimate_model(&clean, &config, a.innings_balls, a.squad_wickets)?;
    write(&a.out, &model.to_document_string()?)?;
    emit(
        out,
        &EstimateSummary {
            schema_version: SCHEMA_VERSION,
            rows_parsed: records.len(),
            rows_rejected: issues.len(),
            cleaning: report,
            model_sha256: model.fingerprint()?,
            out: a.out,
        },
    )
}

#[derive(Serialize)]
struct SolveSummary {
    schema_version: u32,
    bounds: Bounds,
    model_sha256: String,
    states_evaluated: usize,
    start_state: MatchState,
    start_value: f64,
    start_action: Option<BattingAction>,
    out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    bundle_id: Option<String>,
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let model = load_model(a.model.as_deref())?;
    let bundle = ModelBundle::solve(a.bundle_id.clone(), &model, a.reward.spec(), a.bounds.bounds())?;
    write(&a.out, &bundle.tables_document()?.to_document_string()?)?;
    if let Some(path) = &a.bundle {
        bundle.save(path)?;
    }
    let top = bundle.bounds().top();
    emit(
        out,
        &SolveSummary {
            schema_version: SCHEMA_VERSION,
            bounds: bundle.bounds(),
            model_sha256: bundle.model_sha256.clone(),
            states_evaluated: bundle.created.states_evaluated,
            start_state: top,
            start_value: bundle.values.value(top)?,
            start_action: bundle.policy.get(top),
            out: a.out,
            bundle_id: a.bundle.as_ref().map(|_| bundle.bundle_id.clone()),
        },
    )
}

fn recommend(a: RecommendArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let bundle = ModelBundle::load(&a.bundle)?;
    if a.what_if {
        emit(out, &api::what_if(&bundle, a.state).map_err(api_error)?)
    } else {
        emit(out, &api::recommend_state(&bundle, a.state).map_err(api_error)?)
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<(), AppError> {
    if let Some(outcome) = a.apply {
        return emit(out, &api::apply_outcome(a.state, outcome).map_err(api_error)?);
    }
    let path = a
        .bundle
        .as_ref()
        .ok_or_else(|| AppError::Usage("simulate needs --bundle (or --apply OUTCOME)".into()))?;
    let bundle = ModelBundle::load(path)?;
    let set = BundleSet::new([bundle]).map_err(AppError::Data)?;
    let bundle = set.iter().next().expect("one bundle");
    if let Some(trace_path) = &a.trace {
        let trace = simulate_chase(a.state, &bundle.policy, &bundle.model, a.seed)?;
        write(trace_path, &trace.to_lines())?;
    }
    emit(out, &api::simulate(bundle, a.state, a.episodes, a.seed).map_err(api_error)?)
}

#[derive(Serialize)]
struct ControlSummary {
    schema_version: u32,
    algo: &'static str,
    episodes: u64,
    seed: u64,
    bounds: Bounds,
    optimal_start_value: f64,
    greedy_start_value: f64,
    #[serde(flatten)]
    comparison: GreedyComparison,
}

#[derive(Serialize)]
struct EvaluationSummary {
    schema_version: u32,
    algo: &'static str,
    episodes: u64,
    seed: u64,
    bounds: Bounds,
    policy: String,
    states_estimated: usize,
    max_abs_error: f64,
}

#[derive(Serialize)]
struct EstimateEntry {
    #[serde(serialize_with = "fixed12")]
    value: f64,
    visits: u64,
}

#[derive(Serialize)]
struct EstimatesDocument {
    schema_version: u32,
    bounds: Bounds,
    policy: String,
    entries: BTreeMap<String, EstimateEntry>,
}

fn learn(a: LearnArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let model = load_model(a.model.as_deref())?;
    let reward = a.reward.spec();
    let bounds = a.bounds.bounds();
    let start = match a.start {
        Some(state) => StartRule::Fixed { state },
        None => StartRule::ExploringStarts,
    };
    let env = ChaseEnv::new(model.clone(), reward, bounds, start)?;
    let exact = solve_chase(&model, &reward, bounds)?;
    let config = LearnConfig {
        episodes: a.episodes,
        learning_rate: Schedule::Visit { c: a.alpha_c },
        seed: a.seed,
        checkpoint_every: a.checkpoint_every,
        ..LearnConfig::default()
    };
    let top = bounds.top();
    match a.algo {
        LearnAlgo::QLearning | LearnAlgo::Sarsa => {
            let (q, curve) = if a.algo == LearnAlgo::QLearning {
                q_learn(&env, &config, Some(&exact.values))?
            } else {
                sarsa(&env, &config, Some(&exact.values))?
            };
            if let Some(p) = &a.curve {
                write(p, &curve.to_csv())?;
            }
            if let Some(p) = &a.out {
                write(p, &q.to_document_string()?)?;
            }
            let comparison = compare_greedy(&q, &exact.values, &model, &reward, 1e-12)?;
            let greedy = evaluate_policy(&model, &reward, &chase_core::rl::greedy_policy_from(&q))?;
            emit(
                out,
                &ControlSummary {
                    schema_version: SCHEMA_VERSION,
                    algo: if a.algo == LearnAlgo::QLearning { "q-learning" } else { "sarsa" },
                    episodes: a.episodes,
                    seed: a.seed,
                    bounds,
                    optimal_start_value: exact.values.value(top)?,
                    greedy_start_value: greedy.value(top)?,
                    comparison,
                },
            )
        }
        LearnAlgo::Mc | LearnAlgo::Td => {
            let policy = if a.policy == "optimal" {
                exact.policy.clone()
            } else {
                let action: BattingAction = a
                    .policy
                    .parse()
                    .map_err(|e: String| AppError::Usage(format!("--policy: {e}")))?;
                PolicyTable::constant(bounds, action)
            };
            let truth = evaluate_policy(&model, &reward, &policy)?;
            let estimates: ValueEstimates = if a.algo == LearnAlgo::Mc {
                mc_evaluate(&env, &policy, a.episodes, a.seed)?
            } else {
                td_zero_evaluate(&env, &policy, &config)?
            };
            let mut worst = 0.0f64;
            for (s, e) in &estimates {
                if e.visits > 0 {
                    worst = worst.max((e.value - truth.value(*s)?).abs());
                }
            }
            if let Some(p) = &a.out {
                let d = EstimatesDocument {
                    schema_version: SCHEMA_VERSION,
                    bounds,
                    policy: a.policy.clone(),
                    entries: estimates
                        .iter()
                        .map(|(s, e)| {
                            (
                                s.to_string(),
                                EstimateEntry {
                                    value: e.value,
                                    visits: e.visits,
                                },
                            )
                        })
                        .collect(),
                };
                write(p, &doc::to_document(&d)?)?;
            }
            emit(
                out,
                &EvaluationSummary {
                    schema_version: SCHEMA_VERSION,
                    algo: if a.algo == LearnAlgo::Mc { "mc" } else { "td" },
                    episodes: a.episodes,
                    seed: a.seed,
                    bounds,
                    policy: a.policy,
                    states_estimated: estimates.values().filter(|e| e.visits > 0).count(),
                    max_abs_error: worst,
                },
            )
        }
    }
}

#[derive(Serialize)]
struct BanditSummary {
    schema_version: u32,
    algo: &'static str,
    arms: Vec<f64>,
    horizon: u64,
    seed: u64,
    final_pseudo_regret: f64,
    pulls: Vec<u64>,
    out: PathBuf,
}

fn bandit(a: BanditArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let param = match a.algo.as_str() {
        "epsilon-greedy" => a.epsilon,
        "softmax" => a.temperature,
        _ => None,
    };
    let policy = BanditPolicy::from_name(&a.algo, param).map_err(|e| match e {
        chase_core::Error::UnknownPolicy(_) => AppError::Usage(format!(
            "{e}; expected one of {}",
            BanditPolicy::NAMES.join(", ")
        )),
        other => other.into(),
    })?;
    let instance = BanditInstance::new(a.arms.clone(), a.horizon)?;
    let trace = run_bandit_sim(&instance, &policy, a.seed)?;
    match a.out {
        None => out
            .write_all(trace.to_csv().as_bytes())
            .map_err(|e| AppError::io(Path::new("<stdout>"), e)),
        Some(path) => {
            write(&path, &trace.to_csv())?;
            emit(
                out,
                &BanditSummary {
                    schema_version: SCHEMA_VERSION,
                    algo: policy.name(),
                    arms: a.arms,
                    horizon: a.horizon,
                    seed: a.seed,
                    final_pseudo_regret: trace.final_regret(),
                    pulls: trace.arms.iter().map(|s| s.pulls).collect(),
                    out: path,
                },
            )
        }
    }
}

#[derive(Serialize)]
struct PitchStep {
    state: MatchState,
    action: BattingAction,
    outcome: BallOutcome,
    belief: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct PitchReport {
    schema_version: u32,
    prior: BTreeMap<String, f64>,
    steps: Vec<PitchStep>,
    final_state: MatchState,
    most_likely: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    qmdp: Option<Vec<ActionValue>>,
}

fn parse_observation(text: &str) -> Result<(BattingAction, BallOutcome), AppError> {
    let (a, o) = text
        .split_once(':')
        .ok_or_else(|| AppError::Usage(format!("observation {text:?} is not ACTION:OUTCOME")))?;
    let action = a.trim().parse().map_err(AppError::Usage)?;
    let outcome = o.trim().parse().map_err(AppError::Usage)?;
    Ok((action, outcome))
}

fn pitch(a: PitchArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let config = match &a.config {
        Some(p) => PitchConfig::from_document_str(&read(p)?)?,
        None => PitchConfig::default_types(),
    };
    let observations = a
        .observations
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_observation(s))
        .collect::<Result<Vec<_>, _>>()?;
    let prior = Belief::uniform(&config);
    let mut belief = prior.clone();
    let mut state = a.state;
    let mut steps = Vec::new();
    for (action, outcome) in observations {
        belief = update_pitch_belief(&belief, &config, state, action, outcome)?;
        state = state.apply(outcome)?;
        steps.push(PitchStep {
            state,
            action,
            outcome,
            belief: belief.weights.clone(),
        });
    }
    let reward = a.reward.spec();
    let qmdp = if state.is_terminal() {
        None
    } else {
        let bounds = Bounds::new(a.state.runs_needed, a.state.balls_remaining, a.state.wickets_in_hand);
        let tables = solve_pitch_types(&config, &reward, bounds)?;
        Some(qmdp_recommend(&belief, &tables, &config, &reward, state)?)
    };
    emit(
        out,
        &PitchReport {
            schema_version: SCHEMA_VERSION,
            prior: prior.weights,
            steps,
            final_state: state,
            most_likely: belief.most_likely().to_string(),
            qmdp,
        },
    )
}

#[derive(Serialize)]
struct PlayerReport {
    schema_version: u32,
    player_id: String,
    prior: NormalBelief,
    posterior: NormalBelief,
    observations_count: u64,
    predictive_mean: f64,
    predictive_variance: f64,
    credible_mass: f64,
    credible_interval: (f64, f64),
}

fn player(a: PlayerArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let (prior, seen) = match &a.snapshot_in {
        Some(p) => {
            let d = BeliefSnapshotDocument::from_document_str(&read(p)?)?;
            let snap = d
                .snapshots
                .iter()
                .find(|s| s.player_id == a.player_id)
                .ok_or_else(|| AppError::Data(format!("no snapshot for player {:?}", a.player_id)))?;
            (snap.belief()?, snap.observations_count)
        }
        None => (NormalBelief::new(a.prior_mean, a.prior_variance)?, 0),
    };
    let obs = ObservationModel::new(a.observation_variance)?;
    let posterior = update_belief_fold(prior, &a.scores, &obs);
    let (predictive_mean, predictive_variance) = posterior_predictive(posterior, &obs);
    let interval = credible_interval(posterior, a.mass)?;
    let count = seen + a.scores.len() as u64;
    if let Some(p) = &a.snapshot_out {
        let d = BeliefSnapshotDocument::new(vec![BeliefSnapshot::new(a.player_id.clone(), posterior, count)]);
        write(p, &d.to_document_string()?)?;
    }
    emit(
        out,
        &PlayerReport {
            schema_version: SCHEMA_VERSION,
            player_id: a.player_id,
            prior,
            posterior,
            observations_count: count,
            predictive_mean,
            predictive_variance,
            credible_mass: a.mass,
            credible_interval: interval,
        },
    )
}

#[derive(Serialize)]
struct ManufacturingReport {
    schema_version: u32,
    start: String,
    states: usize,
    start_value: f64,
    start_intensity: Option<String>,
    sweeps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_gap_vs_chase: Option<f64>,
}

fn manufacturing(a: ManufacturingArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let params = match &a.params {
        Some(p) => ManufacturingParams::from_document_str(&read(p)?)?,
        None => ManufacturingParams::from_chase_model(
            &load_model(a.model.as_deref())?,
            MatchState::new(a.units, a.periods, a.machines),
        )?,
    };
    if let Some(p) = &a.out {
        write(p, &params.to_document_string()?)?;
    }
    let (mdp, sol) = solve_manufacturing(&params)?;
    let start = chase_core::transfer::manufacturing_label(
        params.units_needed,
        params.periods_remaining,
        params.machines_working,
    );
    let max_gap_vs_chase = if a.compare_chase {
        let rows = params
            .intensity_rows
            .iter()
            .map(|l| l.row)
            .collect::<Vec<_>>();
        if rows.len() != BattingAction::COUNT {
            return Err(AppError::Usage(format!(
                "--compare-chase needs exactly {} intensity levels",
                BattingAction::COUNT
            )));
        }
        let model = TransitionModel::new(
            "mirrored",
            chase_core::model::ActionRows::new([rows[0], rows[1], rows[2], rows[3], rows[4]]),
        );
        let chase = solve_chase(&model, &RewardSpec::default(), mirrored_bounds(&params))?;
        let mut worst = 0.0f64;
        for (i, label) in mdp.states().iter().enumerate() {
            let s: MatchState = label.parse().map_err(AppError::Data)?;
            worst = worst.max((sol.values[i] - chase.values.value(s)?).abs());
        }
        Some(worst)
    } else {
        None
    };
    emit(
        out,
        &ManufacturingReport {
            schema_version: SCHEMA_VERSION,
            start_value: sol.value_of(&mdp, &start).unwrap_or(0.0),
            start_intensity: sol.action_of(&mdp, &start).map(str::to_string),
            start,
            states: mdp.states().len(),
            sweeps: sol.report.sweeps,
            max_gap_vs_chase,
        },
    )
}

#[derive(Serialize)]
struct StockDecision {
    stock: String,
    value: f64,
    order: String,
}

#[derive(Serialize)]
struct InventoryReport {
    schema_version: u32,
    converged: bool,
    sweeps: usize,
    residual: f64,
    levels: Vec<StockDecision>,
}

fn inventory(a: InventoryArgs, out: &mut dyn Write) -> Result<(), AppError> {
    let params = InventoryParams::from_document_str(&read(&a.params)?)?;
    let (mdp, sol) = solve_inventory(&params, a.tolerance, a.max_sweeps)?;
    if !sol.report.converged {
        log::warn!("value iteration stopped after {} sweeps without converging", sol.report.sweeps);
    }
    emit(
        out,
        &InventoryReport {
            schema_version: SCHEMA_VERSION,
            converged: sol.report.converged,
            sweeps: sol.report.sweeps,
            residual: sol.report.max_residual,
            levels: mdp
                .states()
                .iter()
                .enumerate()
                .map(|(i, label)| StockDecision {
                    stock: label.clone(),
                    value: sol.values[i],
                    order: sol.policy[i].map(|a| mdp.actions()[a].clone()).unwrap_or_default(),
                })
                .collect(),
        },
    )
}

fn serve(a: ServeArgs) -> Result<(), AppError> {
    let state = Arc::new(ServiceState::load(a.bundles)?);
    let addr = SocketAddr::new(a.bind, a.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| AppError::Data(format!("runtime: {e}")))?;
    runtime.block_on(server::serve(state, addr))
}

/// Reads ChaseTablesDocument files written by `solve`.
pub fn load_tables(path: &Path) -> Result<ChaseTablesDocument, AppError> {
    Ok(ChaseTablesDocument::from_document_str(&read(path)?)?)
}
