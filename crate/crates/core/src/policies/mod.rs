//! Policy interface and the built-in policy families.

pub mod bandit;
pub mod generator;
pub mod heuristic;
pub mod ppo;
pub mod scripted;
pub mod tactic;

use crate::config::EnvConfig;
use crate::env::{Observation, StepReport};
use crate::metrics::ExploitComponents;
use crate::rng::StreamRng;
use crate::rules::RuleDocument;
use crate::state::{Outcome, Role};
use crate::token::{ActionSet, ActionToken};

pub use bandit::{BanditModel, BanditPolicy, BanditReward};
pub use generator::{GeneratorPolicy, HttpGenerator, ScriptedGenerator, TextGenerator};
pub use heuristic::HeuristicPolicy;
pub use ppo::PpoPolicy;
pub use scripted::ScriptedPolicy;
pub use tactic::{instantiate, Tactic};

/// Everything a policy may look at when choosing a move.
pub struct PolicyContext<'a> {
    pub observation: Observation,
    /// Never empty: NOOP is always legal.
    pub legal: ActionSet,
    pub role: Role,
    pub rng: &'a mut StreamRng,
    /// Global step counter.
    pub t: u32,
    /// Number of moves this party has already made this episode.
    pub own_turn: u32,
    /// A discovery request served on this party is awaiting objection.
    pub pending_request: bool,
    /// A motion against this party is awaiting response.
    pub pending_motion: bool,
    pub initial_budget: f64,
    pub rules: &'a RuleDocument,
    /// Contract violations raised while choosing (invalid generator replies, ...).
    pub violations: Vec<String>,
}

impl PolicyContext<'_> {
    /// Returns `token` if legal, otherwise NOOP plus a recorded violation.
    pub fn legal_or_noop(&mut self, token: ActionToken, source: &str) -> ActionToken {
        if self.legal.contains(token.kind) {
            token
        } else {
            self.violations.push(format!("{source}: {} is not legal here", token.kind));
            ActionToken::noop()
        }
    }
}

/// End-of-episode information handed to each policy.
#[derive(Debug, Clone)]
pub struct EpisodeFeedback<'a> {
    pub role: Role,
    pub outcome: &'a Outcome,
    pub own: ExploitComponents,
    pub opponent: ExploitComponents,
}

pub trait Policy: Send {
    fn id(&self) -> &str;

    fn begin_episode(&mut self, _role: Role) {}

    fn act(&mut self, ctx: &mut PolicyContext<'_>) -> ActionToken;

    /// Called after every environment step, both own and opponent's.
    fn observe(&mut self, _report: &StepReport, _cfg: &EnvConfig) {}

    fn end_episode(&mut self, _feedback: &EpisodeFeedback<'_>) {}

    /// Learning updates applied so far.
    fn updates(&self) -> u64 {
        0
    }
}
