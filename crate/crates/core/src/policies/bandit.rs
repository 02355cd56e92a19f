//! Epsilon-greedy linear contextual bandit over tactics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generator::{generate_token, TextGenerator};
use super::tactic::{instantiate, Tactic};
use super::{EpisodeFeedback, Policy, PolicyContext};
use crate::env::OBS_DIM;
use crate::token::ActionToken;

pub const FEATURES: usize = OBS_DIM + 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditModel {
    pub epsilon: f64,
    pub learning_rate: f64,
    /// One weight vector per arm over `[observation; 1]`.
    pub weights: Vec<[f64; FEATURES]>,
}

impl Default for BanditModel {
    fn default() -> Self {
        BanditModel::new(Tactic::ALL.len(), 0.1, 0.05)
    }
}

pub fn features(obs: &[f64]) -> [f64; FEATURES] {
    let mut x = [1.0; FEATURES];
    x[..OBS_DIM].copy_from_slice(&obs[..OBS_DIM]);
    x
}

fn dot(w: &[f64; FEATURES], x: &[f64; FEATURES]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl BanditModel {
    pub fn new(arms: usize, epsilon: f64, learning_rate: f64) -> Self {
        BanditModel { epsilon, learning_rate, weights: vec![[0.0; FEATURES]; arms] }
    }

    pub fn arms(&self) -> usize {
        self.weights.len()
    }

    pub fn score(&self, arm: usize, x: &[f64; FEATURES]) -> f64 {
        dot(&self.weights[arm], x)
    }

    /// Greedy arm; ties go to the lowest index.
    pub fn greedy(&self, x: &[f64; FEATURES]) -> usize {
        let mut best = 0;
        let mut best_score = self.score(0, x);
        for arm in 1..self.arms() {
            let s = self.score(arm, x);
            if s > best_score {
                best = arm;
                best_score = s;
            }
        }
        best
    }

    /// With probability epsilon a uniform arm, otherwise greedy.
    pub fn select<R: Rng + ?Sized>(&self, x: &[f64; FEATURES], rng: &mut R) -> usize {
        if rng.gen::<f64>() < self.epsilon {
            rng.gen_range(0..self.arms())
        } else {
            self.greedy(x)
        }
    }

    /// One SGD pass in episode order with the same terminal reward for every
    /// recorded decision.
    pub fn update(&mut self, decisions: &[([f64; FEATURES], usize)], reward: f64) {
        for (x, arm) in decisions {
            let err = reward - dot(&self.weights[*arm], x);
            for (w, xi) in self.weights[*arm].iter_mut().zip(x) {
                *w += self.learning_rate * err * xi;
            }
        }
    }
}

/// Terminal reward fed to the bandit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BanditReward {
    /// Own composite exploit score.
    #[default]
    Composite,
    /// 1 win, 0.5 settlement, 0 loss.
    EffectiveWin,
}

pub struct BanditPolicy {
    id: String,
    pub model: BanditModel,
    pub learning: bool,
    pub reward: BanditReward,
    generator: Option<Box<dyn TextGenerator>>,
    decisions: Vec<([f64; FEATURES], usize)>,
    updates: u64,
}

impl BanditPolicy {
    /// Tactics instantiated by the scripted mapping.
    pub fn new(model: BanditModel) -> Self {
        BanditPolicy {
            id: "bandit".into(),
            model,
            learning: false,
            reward: BanditReward::Composite,
            generator: None,
            decisions: Vec::new(),
            updates: 0,
        }
    }

    /// Tactics instantiated by a text generator prompted with the tactic hint.
    pub fn with_generator(mut self, generator: Box<dyn TextGenerator>) -> Self {
        self.generator = Some(generator);
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn learning(mut self, on: bool) -> Self {
        self.learning = on;
        self
    }
}

impl Policy for BanditPolicy {
    fn id(&self) -> &str {
        &self.id
    }

    fn begin_episode(&mut self, _role: crate::state::Role) {
        self.decisions.clear();
    }

    fn act(&mut self, ctx: &mut PolicyContext<'_>) -> ActionToken {
        let x = features(ctx.observation.as_slice());
        let arm = self.model.select(&x, ctx.rng);
        self.decisions.push((x, arm));
        let tactic = Tactic::ALL[arm];
        match self.generator.as_mut() {
            Some(gen) => generate_token(gen.as_mut(), ctx, Some(tactic.as_str())),
            None => instantiate(tactic, ctx),
        }
    }

    fn end_episode(&mut self, feedback: &EpisodeFeedback<'_>) {
        if !self.learning {
            return;
        }
        let r = match self.reward {
            BanditReward::Composite => feedback.own.composite,
            BanditReward::EffectiveWin => feedback.outcome.score(feedback.role),
        };
        self.model.update(&self.decisions, r);
        self.updates += 1;
    }

    fn updates(&self) -> u64 {
        self.updates
    }
}
