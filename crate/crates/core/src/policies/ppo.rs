//! PPO policy: masked categorical over the 13 token types with fixed
//! per-token parameters. Optionally owns a learner and trains on its own
//! episodes.

use serde::{Deserialize, Serialize};

use super::{EpisodeFeedback, Policy, PolicyContext};
use crate::config::EnvConfig;
use crate::env::{shaped_reward, StepReport};
use crate::learning::ppo::{argmax_index, sample_index};
use crate::learning::{ActorCritic, PpoLearner, RolloutBuffer, Transition};
use crate::state::Role;
use crate::token::{ActionKind, ActionToken};

/// How a frozen network picks among legal tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PpoMode {
    #[default]
    Sample,
    Greedy,
}

/// Parameters attached to a token type chosen by the network.
pub fn token_for(kind: ActionKind, ctx: &PolicyContext<'_>) -> ActionToken {
    match kind {
        ActionKind::RequestDocs => ActionToken::new(kind).with("custodians", 10).with("complexity", 0.6),
        ActionKind::FileMotion | ActionKind::MoveCompel | ActionKind::MoveSanctions => {
            ActionToken::new(kind).with("aggr", 0.3)
        }
        ActionKind::SettlementOffer => ActionToken::new(kind).with("amount", 0.3 * ctx.initial_budget),
        ActionKind::FileProceeding | ActionKind::ReferenceAuthority => {
            ActionToken { kind, params: ctx.rules.exemplar_params(kind).unwrap_or_default() }
        }
        _ => ActionToken::new(kind),
    }
}

enum Brain {
    Frozen(ActorCritic),
    Learning(Box<PpoLearner>),
}

pub struct PpoPolicy {
    id: String,
    brain: Brain,
    pub mode: PpoMode,
    role: Role,
    buffer: RolloutBuffer,
    episode_return: f64,
    updates: u64,
}

impl PpoPolicy {
    pub fn frozen(net: ActorCritic, mode: PpoMode) -> Self {
        PpoPolicy::build(Brain::Frozen(net), mode)
    }

    /// Samples from the policy and runs one update at the end of each episode.
    pub fn training(learner: PpoLearner) -> Self {
        PpoPolicy::build(Brain::Learning(Box::new(learner)), PpoMode::Sample)
    }

    fn build(brain: Brain, mode: PpoMode) -> Self {
        PpoPolicy {
            id: "ppo".into(),
            brain,
            mode,
            role: Role::Plaintiff,
            buffer: RolloutBuffer::default(),
            episode_return: 0.0,
            updates: 0,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn net(&self) -> &ActorCritic {
        match &self.brain {
            Brain::Frozen(n) => n,
            Brain::Learning(l) => &l.net,
        }
    }

    pub fn learner(&self) -> Option<&PpoLearner> {
        match &self.brain {
            Brain::Learning(l) => Some(l),
            Brain::Frozen(_) => None,
        }
    }

    pub fn into_learner(self) -> Option<PpoLearner> {
        match self.brain {
            Brain::Learning(l) => Some(*l),
            Brain::Frozen(_) => None,
        }
    }

    /// Shaped return accumulated by this policy's role in the last episode.
    pub fn episode_return(&self) -> f64 {
        self.episode_return
    }
}

impl Policy for PpoPolicy {
    fn id(&self) -> &str {
        &self.id
    }

    fn begin_episode(&mut self, role: Role) {
        self.role = role;
        self.buffer.clear();
        self.episode_return = 0.0;
    }

    fn act(&mut self, ctx: &mut PolicyContext<'_>) -> ActionToken {
        let obs = ctx.observation.as_slice().to_vec();
        let mask = ctx.legal.mask().to_vec();
        let net = self.net();
        let probs = net.probs(&obs, &mask);
        let learning = matches!(self.brain, Brain::Learning(_));
        let idx = match (learning, self.mode) {
            (false, PpoMode::Greedy) => argmax_index(&probs),
            _ => sample_index(&probs, ctx.rng),
        };
        if learning {
            let value = net.value(&obs);
            self.buffer.push(Transition {
                obs,
                mask,
                action: idx,
                log_prob: probs[idx].ln(),
                value,
                reward: 0.0,
                done: false,
            });
        }
        let kind = ActionKind::from_index(idx).expect("network width matches token count");
        token_for(kind, ctx)
    }

    /// Credits every shaped reward for this role to the latest decision.
    fn observe(&mut self, report: &StepReport, cfg: &EnvConfig) {
        let r = shaped_reward(report, self.role, cfg);
        self.episode_return += r;
        if let Some(last) = self.buffer.last_mut() {
            last.reward += r;
            if report.outcome.is_some() {
                last.done = true;
            }
        }
    }

    fn end_episode(&mut self, _feedback: &EpisodeFeedback<'_>) {
        let Brain::Learning(learner) = &mut self.brain else {
            return;
        };
        if let Some(last) = self.buffer.last_mut() {
            last.done = true;
            match learner.update(&self.buffer) {
                Ok(_) => self.updates += 1,
                Err(e) => log::warn!("skipping PPO update: {e}"),
            }
        }
        self.buffer.clear();
    }

    fn updates(&self) -> u64 {
        self.updates
    }
}
