//! Training schedules: PPO and the bandit each play the heuristic, judges
//! alternating by episode.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::episode::{run_episode, MatchSpec};
use super::league::episode_seeds;
use crate::env::{Env, OBS_DIM};
use crate::learning::{ActorCritic, PpoConfig, PpoLearner};
use crate::policies::{BanditModel, BanditPolicy, HeuristicPolicy, Policy, PpoPolicy};
use crate::rng::{derive_seed, stream};
use crate::state::Role;
use crate::token::ActionKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub episodes: usize,
    pub master_seed: u64,
    /// Rotated by episode index.
    pub judges: Vec<String>,
    pub ppo: PpoConfig,
    pub regime: String,
    /// Trailing window for the smoothed curve.
    pub smoothing: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 300,
            master_seed: 0,
            judges: vec!["permissive".into(), "strict".into()],
            ppo: PpoConfig::default(),
            regime: "bankruptcy".into(),
            smoothing: 10,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("unknown judge profile `{0}`")]
    UnknownJudge(String),
    #[error("no judges configured")]
    NoJudges,
    #[error(transparent)]
    Ppo(#[from] crate::learning::PpoError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub episode: usize,
    pub judge: String,
    pub role: Role,
    /// Shaped return (PPO) or terminal bandit reward for the episode.
    pub episode_return: f64,
    /// Trailing mean of `episode_return` over the smoothing window.
    pub smoothed: f64,
    /// 1 win, 0.5 settlement, 0 loss.
    pub score: f64,
    pub steps: usize,
}

/// Judge for episode `e` (even episodes use the first judge) and the
/// learner's role: it flips every second episode so each judge sees the
/// learner in both roles.
pub fn schedule(cfg: &TrainConfig, e: usize) -> (String, Role) {
    let judge = cfg.judges[e % cfg.judges.len()].clone();
    let role = if (e / 2).is_multiple_of(2) { Role::Plaintiff } else { Role::Defendant };
    (judge, role)
}

fn check(env: &Env, cfg: &TrainConfig) -> Result<(), TrainError> {
    if cfg.judges.is_empty() {
        return Err(TrainError::NoJudges);
    }
    for j in &cfg.judges {
        if env.config().judge(j).is_none() {
            return Err(TrainError::UnknownJudge(j.clone()));
        }
    }
    cfg.ppo.validate()?;
    Ok(())
}

fn smooth(curve: &mut [CurveRow], window: usize) {
    let window = window.max(1);
    for i in 0..curve.len() {
        let lo = (i + 1).saturating_sub(window);
        let slice = &curve[lo..=i];
        curve[i].smoothed = slice.iter().map(|r| r.episode_return).sum::<f64>() / slice.len() as f64;
    }
}

pub fn initial_net(cfg: &TrainConfig) -> ActorCritic {
    let mut rng = stream(derive_seed(cfg.master_seed, "ppo-init"));
    ActorCritic::new(OBS_DIM, ActionKind::COUNT, cfg.ppo.hidden, &mut rng)
}

#[derive(Debug, Clone)]
pub struct TrainedPpo {
    pub net: ActorCritic,
    pub curve: Vec<CurveRow>,
    pub updates: u64,
}

/// Plays `cfg.episodes` episodes against the heuristic with one PPO update
/// after each, then returns the final network.
pub fn train_ppo(env: &Env, cfg: &TrainConfig) -> Result<TrainedPpo, TrainError> {
    check(env, cfg)?;
    let master = derive_seed(cfg.master_seed, "train-ppo");
    let mut learner = Some(PpoLearner::new(initial_net(cfg), cfg.ppo.clone()));
    let mut curve = Vec::with_capacity(cfg.episodes);
    let mut updates = 0;
    for e in 0..cfg.episodes {
        let (judge, role) = schedule(cfg, e);
        let spec = MatchSpec {
            policy_i: "ppo".into(),
            policy_j: "heuristic".into(),
            judge: judge.clone(),
            seed: e as u64,
            i_role: role,
            regime: cfg.regime.clone(),
        };
        let seeds = episode_seeds(master, &spec);
        let profile = env.config().judge(&judge).expect("checked");
        let mut ppo = PpoPolicy::training(learner.take().expect("learner present"));
        let mut heuristic = HeuristicPolicy;
        let rec = match role {
            Role::Plaintiff => run_episode(env, &spec, profile, seeds, &mut ppo, &mut heuristic),
            Role::Defendant => run_episode(env, &spec, profile, seeds, &mut heuristic, &mut ppo),
        };
        updates += ppo.updates();
        curve.push(CurveRow {
            episode: e,
            judge,
            role,
            episode_return: ppo.episode_return(),
            smoothed: 0.0,
            score: rec.outcome.score(role),
            steps: rec.steps.len(),
        });
        learner = ppo.into_learner();
    }
    smooth(&mut curve, cfg.smoothing);
    Ok(TrainedPpo { net: learner.expect("learner present").net, curve, updates })
}

#[derive(Debug, Clone)]
pub struct TrainedBandit {
    pub model: BanditModel,
    pub curve: Vec<CurveRow>,
    pub updates: u64,
}

/// Same schedule as PPO; one bandit SGD pass per episode on its composite.
pub fn train_bandit(env: &Env, cfg: &TrainConfig, model: BanditModel) -> Result<TrainedBandit, TrainError> {
    check(env, cfg)?;
    let master = derive_seed(cfg.master_seed, "train-bandit");
    let mut bandit = BanditPolicy::new(model).learning(true);
    let mut curve = Vec::with_capacity(cfg.episodes);
    for e in 0..cfg.episodes {
        let (judge, role) = schedule(cfg, e);
        let spec = MatchSpec {
            policy_i: "bandit".into(),
            policy_j: "heuristic".into(),
            judge: judge.clone(),
            seed: e as u64,
            i_role: role,
            regime: cfg.regime.clone(),
        };
        let seeds = episode_seeds(master, &spec);
        let profile = env.config().judge(&judge).expect("checked");
        let mut heuristic = HeuristicPolicy;
        let rec = match role {
            Role::Plaintiff => run_episode(env, &spec, profile, seeds, &mut bandit, &mut heuristic),
            Role::Defendant => run_episode(env, &spec, profile, seeds, &mut heuristic, &mut bandit),
        };
        curve.push(CurveRow {
            episode: e,
            judge,
            role,
            episode_return: rec.composite(role),
            smoothed: 0.0,
            score: rec.outcome.score(role),
            steps: rec.steps.len(),
        });
    }
    smooth(&mut curve, cfg.smoothing);
    let updates = bandit.updates();
    Ok(TrainedBandit { model: bandit.model, curve, updates })
}
