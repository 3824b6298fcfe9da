//! Run-chase decision analytics.
//!
//! The crate is organised around the chase Markov decision process:
//!
//! - [`model`]: match state, batting actions, ball outcomes, transition rows.
//! - [`ingest`]: ball-by-ball parsing, cleaning, empirical estimation and a
//!   categorical Naive Bayes classifier.
//! - [`solver`]: exact backward induction, fixed-policy evaluation,
//!   recommendations, and generic value iteration over [`mdp::MdpInstance`].
//! - [`sim`]: seeded rollouts and Monte Carlo win-probability estimates.
//! - [`rl`]: tabular Q-learning, SARSA, first-visit Monte Carlo and TD(0).
//! - [`bayes`]: conjugate Normal player-ability model.
//! - [`bandit`]: bowler selection bandits with pseudo-regret accounting.
//! - [`belief`]: hidden pitch type, Bayesian belief tracking and QMDP.
//! - [`transfer`]: manufacturing and inventory MDPs on the same engine.

pub mod bandit;
pub mod bayes;
pub mod belief;
pub mod doc;
pub mod error;
pub mod ingest;
pub mod mdp;
pub mod model;
pub mod rl;
pub mod sim;
pub mod solver;
pub mod transfer;

pub use error::{Error, Result};
