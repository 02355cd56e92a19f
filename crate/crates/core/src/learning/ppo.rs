//! Actor-critic with a clipped surrogate objective and masked categorical
//! policy.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::adam::Adam;
use super::gae::{compute_gae, normalize, GaeError};
use super::mlp::Mlp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Full-batch passes over each episode's rollout.
    pub epochs: usize,
    pub hidden: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            learning_rate: 3e-4,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            entropy_coef: 0.005,
            value_coef: 0.5,
            epochs: 4,
            hidden: 64,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), PpoError> {
        let ok = self.clip > 0.0
            && self.gamma > 0.0
            && self.gamma <= 1.0
            && self.gae_lambda >= 0.0
            && self.gae_lambda <= 1.0
            && self.learning_rate > 0.0
            && self.hidden > 0;
        if ok {
            Ok(())
        } else {
            Err(PpoError::Config)
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PpoError {
    #[error("invalid PPO config")]
    Config,
    #[error(transparent)]
    Gae(#[from] GaeError),
    #[error("non-finite loss in epoch {epoch}; parameters rolled back")]
    NonFinite { epoch: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub mask: Vec<bool>,
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RolloutBuffer {
    pub steps: Vec<Transition>,
}

impl RolloutBuffer {
    pub fn push(&mut self, t: Transition) {
        self.steps.push(t);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn clear(&mut self) {
        self.steps.clear();
    }

    pub fn last_mut(&mut self) -> Option<&mut Transition> {
        self.steps.last_mut()
    }

    pub fn gae(&self, cfg: &PpoConfig) -> Result<(Vec<f64>, Vec<f64>), GaeError> {
        let rewards: Vec<f64> = self.steps.iter().map(|s| s.reward).collect();
        let values: Vec<f64> = self.steps.iter().map(|s| s.value).collect();
        let dones: Vec<bool> = self.steps.iter().map(|s| s.done).collect();
        compute_gae(&rewards, &values, &dones, 0.0, cfg.gamma, cfg.gae_lambda)
    }
}

/// Softmax over the unmasked entries; masked entries get probability 0.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Vec<f64> {
    let max = logits.iter().zip(mask).filter(|(_, &m)| m).map(|(l, _)| *l).fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logits.iter().zip(mask).map(|(l, &m)| if m { (l - max).exp() } else { 0.0 }).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
    probs
}

/// Inverse-CDF draw over legal entries.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Highest-probability legal index; ties go to the lowest index.
pub fn argmax_index(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_params: Vec<f64>,
    pub critic_params: Vec<f64>,
}

impl ActorCritic {
    /// `obs -> hidden -> hidden -> actions` policy and `obs -> hidden -> hidden -> 1`
    /// value net, orthogonally initialized with a 0.01-scaled policy head.
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, n_actions: usize, hidden: usize, rng: &mut R) -> Self {
        let actor = Mlp::new(&[obs_dim, hidden, hidden, n_actions]);
        let critic = Mlp::new(&[obs_dim, hidden, hidden, 1]);
        let gain = 2f64.sqrt();
        let actor_params = actor.init(rng, gain, 0.01);
        let critic_params = critic.init(rng, gain, 1.0);
        ActorCritic { actor, critic, actor_params, critic_params }
    }

    pub fn from_parts(actor: Mlp, critic: Mlp, actor_params: Vec<f64>, critic_params: Vec<f64>) -> Self {
        assert_eq!(actor.num_params(), actor_params.len());
        assert_eq!(critic.num_params(), critic_params.len());
        assert_eq!(critic.output_dim(), 1);
        ActorCritic { actor, critic, actor_params, critic_params }
    }

    pub fn probs(&self, obs: &[f64], mask: &[bool]) -> Vec<f64> {
        let logits = self.actor.forward(&self.actor_params, obs);
        masked_softmax(logits.output(), mask)
    }

    pub fn value(&self, obs: &[f64]) -> f64 {
        self.critic.forward(&self.critic_params, obs).output()[0]
    }

    pub fn is_finite(&self) -> bool {
        self.actor_params.iter().chain(&self.critic_params).all(|p| p.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub total: f64,
    pub clip_fraction: f64,
}

/// Loss `-mean(min(r*A, clip(r)*A)) + value_coef*mean((V-R)^2) - entropy_coef*mean(H)`
/// and its gradients with respect to actor and critic parameters.
pub fn loss_and_grads(
    ac: &ActorCritic,
    steps: &[Transition],
    advantages: &[f64],
    returns: &[f64],
    cfg: &PpoConfig,
) -> (LossStats, Vec<f64>, Vec<f64>) {
    let n = steps.len() as f64;
    let mut g_actor = vec![0.0; ac.actor_params.len()];
    let mut g_critic = vec![0.0; ac.critic_params.len()];
    let mut stats = LossStats::default();
    let mut clipped = 0usize;
    for ((s, &a), &ret) in steps.iter().zip(advantages).zip(returns) {
        let trace = ac.actor.forward(&ac.actor_params, &s.obs);
        let probs = masked_softmax(trace.output(), &s.mask);
        let log_p = probs[s.action].ln();
        let ratio = (log_p - s.log_prob).exp();
        let surr1 = ratio * a;
        let surr2 = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip) * a;
        stats.policy_loss -= surr1.min(surr2) / n;
        if surr2 < surr1 {
            clipped += 1;
        }
        let entropy: f64 = probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
        stats.entropy += entropy / n;

        let mut d_logits = vec![0.0; probs.len()];
        for (k, (d, &p)) in d_logits.iter_mut().zip(&probs).enumerate() {
            if !s.mask[k] {
                continue;
            }
            if surr1 <= surr2 {
                let onehot = if k == s.action { 1.0 } else { 0.0 };
                *d -= a * ratio * (onehot - p) / n;
            }
            if p > 0.0 {
                *d += cfg.entropy_coef * p * (p.ln() + entropy) / n;
            }
        }
        ac.actor.backward(&ac.actor_params, &trace, &d_logits, &mut g_actor);

        let vtrace = ac.critic.forward(&ac.critic_params, &s.obs);
        let v = vtrace.output()[0];
        stats.value_loss += (v - ret) * (v - ret) / n;
        let dv = cfg.value_coef * 2.0 * (v - ret) / n;
        ac.critic.backward(&ac.critic_params, &vtrace, &[dv], &mut g_critic);
    }
    stats.total = stats.policy_loss + cfg.value_coef * stats.value_loss - cfg.entropy_coef * stats.entropy;
    stats.clip_fraction = clipped as f64 / n;
    (stats, g_actor, g_critic)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateStats {
    pub first: LossStats,
    pub last: LossStats,
    pub samples: usize,
}

/// Network plus optimizer state: the single writer during training.
#[derive(Debug, Clone, PartialEq)]
pub struct PpoLearner {
    pub net: ActorCritic,
    pub cfg: PpoConfig,
    adam_actor: Adam,
    adam_critic: Adam,
    updates: u64,
}

impl PpoLearner {
    pub fn new(net: ActorCritic, cfg: PpoConfig) -> Self {
        let adam_actor = Adam::new(net.actor_params.len());
        let adam_critic = Adam::new(net.critic_params.len());
        PpoLearner { net, cfg, adam_actor, adam_critic, updates: 0 }
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Computes GAE on the buffer, normalizes advantages, then runs
    /// `cfg.epochs` full-batch Adam steps. A non-finite loss or gradient
    /// restores the parameters and optimizer state from before the call.
    pub fn update(&mut self, buffer: &RolloutBuffer) -> Result<UpdateStats, PpoError> {
        let (mut adv, returns) = buffer.gae(&self.cfg)?;
        normalize(&mut adv);
        let snapshot = (self.net.clone(), self.adam_actor.clone(), self.adam_critic.clone());
        let mut out = UpdateStats { samples: buffer.len(), ..Default::default() };
        for epoch in 0..self.cfg.epochs {
            let (stats, ga, gc) = loss_and_grads(&self.net, &buffer.steps, &adv, &returns, &self.cfg);
            let finite = stats.total.is_finite() && ga.iter().chain(&gc).all(|g| g.is_finite());
            if !finite {
                (self.net, self.adam_actor, self.adam_critic) = snapshot;
                log::warn!("PPO update aborted: non-finite loss in epoch {epoch}");
                return Err(PpoError::NonFinite { epoch });
            }
            if epoch == 0 {
                out.first = stats;
            }
            out.last = stats;
            let lr = self.cfg.learning_rate;
            self.adam_actor.step(&mut self.net.actor_params, &ga, lr).expect("actor shapes");
            self.adam_critic.step(&mut self.net.critic_params, &gc, lr).expect("critic shapes");
        }
        if !self.net.is_finite() {
            (self.net, self.adam_actor, self.adam_critic) = snapshot;
            return Err(PpoError::NonFinite { epoch: self.cfg.epochs });
        }
        self.updates += 1;
        Ok(out)
    }
}
