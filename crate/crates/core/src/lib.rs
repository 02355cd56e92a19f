//! Rules-as-code litigation simulator: procedural rule engine, two-party
//! environment, baseline and learned policies, training and league harness,
//! and tournament evaluation.

pub mod config;
pub mod env;
pub mod evaluation;
pub mod harness;
pub mod learning;
pub mod metrics;
pub mod policies;
pub mod regimes;
pub mod rng;
pub mod rules;
pub mod state;
pub mod token;

pub use config::EnvConfig;
pub use env::{Env, EnvError, Observation, StepReport};
pub use regimes::Regime;
pub use rules::{load_rules, RuleDocument};
pub use state::{CaseState, JudgeProfile, Outcome, OutcomeKind, Role};
pub use token::{ActionKind, ActionSet, ActionToken};
