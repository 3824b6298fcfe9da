use thiserror::Error;

use crate::model::{MatchState, TerminalStatus};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state {state} is terminal ({status})")]
    TerminalState {
        state: MatchState,
        status: TerminalStatus,
    },

    #[error("state {state} lies outside the table bounds {bounds}")]
    OutOfBounds {
        state: MatchState,
        bounds: crate::model::Bounds,
    },

    #[error("invalid outcome distribution for {context}: {reason}")]
    InvalidDistribution { context: String, reason: String },

    #[error("aggression {0} outside the supported range [0.25, 4]")]
    AggressionOutOfRange(f64),

    #[error("invalid reward spec: {0}")]
    InvalidReward(String),

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("policy has no action for state {0}")]
    PolicyGap(MatchState),

    #[error("input has no header line")]
    MissingHeader,

    #[error("unexpected header {found:?}")]
    BadHeader { found: String },

    #[error("cannot estimate a distribution from zero records without smoothing")]
    EmptyEstimate,

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("unknown bandit policy {0:?}")]
    UnknownPolicy(String),

    #[error("invalid bandit setup: {0}")]
    InvalidBandit(String),

    #[error("outcome {outcome} under {action} is impossible for every pitch type")]
    ImpossibleObservation { action: String, outcome: String },

    #[error("no value table for pitch type {0:?}")]
    MissingValueTable(String),

    #[error("invalid pitch configuration: {0}")]
    InvalidPitchConfig(String),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("malformed document: {0}")]
    Document(#[from] serde_json::Error),

    #[error("delimited text error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
