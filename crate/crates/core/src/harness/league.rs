//! Policy registry and the all-against-all cross-play league.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::episode::{run_episode, EpisodeRecord, EpisodeSeeds, MatchSpec};
use crate::env::{Env, OBS_DIM};
use crate::learning::ActorCritic;
use crate::policies::ppo::PpoMode;
use crate::policies::{
    BanditModel, BanditPolicy, GeneratorPolicy, HeuristicPolicy, HttpGenerator, Policy, PpoPolicy, ScriptedGenerator,
    TextGenerator,
};
use crate::rng::{derive_index, derive_seed, stream};
use crate::state::Role;
use crate::token::ActionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Ppo,
    Bandit,
    Llm,
    Heuristic,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::Ppo, PolicyKind::Bandit, PolicyKind::Llm, PolicyKind::Heuristic];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Ppo => "ppo",
            PolicyKind::Bandit => "bandit",
            PolicyKind::Llm => "llm",
            PolicyKind::Heuristic => "heuristic",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown policy `{s}` (expected ppo, bandit, llm or heuristic)"))
    }
}

/// Where generator-backed policies get their replies.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum GeneratorSource {
    #[default]
    Scripted,
    Remote {
        url: String,
        token: Option<String>,
    },
}

impl GeneratorSource {
    /// Remote when the endpoint variable is set, scripted otherwise.
    pub fn from_env() -> Self {
        match std::env::var(crate::policies::generator::URL_ENV) {
            Ok(url) if !url.is_empty() => {
                GeneratorSource::Remote { url, token: std::env::var(crate::policies::generator::TOKEN_ENV).ok() }
            }
            _ => GeneratorSource::Scripted,
        }
    }

    fn build(&self, seed: u64) -> Box<dyn TextGenerator> {
        match self {
            GeneratorSource::Scripted => Box::new(ScriptedGenerator::new(seed)),
            GeneratorSource::Remote { url, token } => Box::new(HttpGenerator::new(url.clone(), token.clone())),
        }
    }
}

/// Frozen artifacts from which per-episode policy instances are built.
#[derive(Debug, Clone)]
pub struct PolicyPool {
    pub bandit: BanditModel,
    pub ppo: ActorCritic,
    pub ppo_mode: PpoMode,
    pub generator: GeneratorSource,
}

impl PolicyPool {
    pub fn new(bandit: BanditModel, ppo: ActorCritic) -> Self {
        PolicyPool { bandit, ppo, ppo_mode: PpoMode::default(), generator: GeneratorSource::Scripted }
    }

    /// Untrained bandit and freshly initialized PPO network.
    pub fn untrained(seed: u64) -> Self {
        let net = ActorCritic::new(OBS_DIM, ActionKind::COUNT, 64, &mut stream(derive_seed(seed, "ppo-init")));
        PolicyPool::new(BanditModel::default(), net)
    }

    pub fn make(&self, kind: PolicyKind, seed: u64) -> Box<dyn Policy> {
        match kind {
            PolicyKind::Heuristic => Box::new(HeuristicPolicy),
            PolicyKind::Ppo => Box::new(PpoPolicy::frozen(self.ppo.clone(), self.ppo_mode)),
            PolicyKind::Llm => Box::new(GeneratorPolicy::new(self.generator.build(seed))),
            PolicyKind::Bandit => {
                let p = BanditPolicy::new(self.bandit.clone());
                match self.generator {
                    GeneratorSource::Scripted => Box::new(p),
                    GeneratorSource::Remote { .. } => Box::new(p.with_generator(self.generator.build(seed))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeagueConfig {
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    pub judges: Vec<String>,
    pub master_seed: u64,
    pub regime: String,
    /// Keep updating the bandit during the league (forces sequential play).
    pub bandit_learning: bool,
    pub parallel: bool,
}

impl Default for LeagueConfig {
    fn default() -> Self {
        LeagueConfig {
            policies: PolicyKind::ALL.to_vec(),
            seeds: (0..10).collect(),
            judges: vec!["permissive".into(), "strict".into()],
            master_seed: 0,
            regime: "bankruptcy".into(),
            bandit_learning: false,
            parallel: true,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LeagueError {
    #[error("a league needs at least two distinct policies")]
    TooFewPolicies,
    #[error("policy `{0}` listed twice")]
    Duplicate(PolicyKind),
    #[error("unknown judge profile `{0}`")]
    UnknownJudge(String),
}

/// Canonical order: pairs (i < j in list order), then seeds, judges, and
/// `i` as plaintiff before `i` as defendant.
pub fn league_specs(cfg: &LeagueConfig) -> Vec<MatchSpec> {
    let mut specs = Vec::new();
    for (a, pi) in cfg.policies.iter().enumerate() {
        for pj in &cfg.policies[a + 1..] {
            for &seed in &cfg.seeds {
                for judge in &cfg.judges {
                    for i_role in Role::BOTH {
                        specs.push(MatchSpec {
                            policy_i: pi.to_string(),
                            policy_j: pj.to_string(),
                            judge: judge.clone(),
                            seed,
                            i_role,
                            regime: cfg.regime.clone(),
                        });
                    }
                }
            }
        }
    }
    specs
}

/// Stream seeds depend only on the master seed and the `MatchSpec` itself. The case
/// and environment streams ignore who plays, so every pairing and role
/// assignment faces the same merits and judge draws for a (seed, judge) cell.
pub fn episode_seeds(master: u64, spec: &MatchSpec) -> EpisodeSeeds {
    let case = derive_index(derive_seed(master, "case"), spec.seed);
    let env = derive_seed(derive_index(derive_seed(master, "env"), spec.seed), &spec.judge);
    let policy = |role: Role| {
        let label = format!("{}|{}|{}|{}|{}", spec.policy_i, spec.policy_j, spec.judge, spec.i_role, role);
        derive_seed(derive_index(derive_seed(master, "policy"), spec.seed), &label)
    };
    EpisodeSeeds { case, env, plaintiff: policy(Role::Plaintiff), defendant: policy(Role::Defendant) }
}

fn validate(env: &Env, cfg: &LeagueConfig) -> Result<(), LeagueError> {
    if cfg.policies.len() < 2 {
        return Err(LeagueError::TooFewPolicies);
    }
    for (i, p) in cfg.policies.iter().enumerate() {
        if cfg.policies[..i].contains(p) {
            return Err(LeagueError::Duplicate(*p));
        }
    }
    for j in &cfg.judges {
        if env.config().judge(j).is_none() {
            return Err(LeagueError::UnknownJudge(j.clone()));
        }
    }
    Ok(())
}

/// Plays one `MatchSpec` with fresh frozen policy instances.
pub fn run_match(env: &Env, pool: &PolicyPool, spec: &MatchSpec, master: u64) -> EpisodeRecord {
    let seeds = episode_seeds(master, spec);
    let judge = env.config().judge(&spec.judge).expect("judge validated");
    let kind = |r: Role| spec.policy_for(r).parse::<PolicyKind>().expect("spec built from kinds");
    let mut pl = pool.make(kind(Role::Plaintiff), seeds.plaintiff);
    let mut df = pool.make(kind(Role::Defendant), seeds.defendant);
    run_episode(env, spec, judge, seeds, pl.as_mut(), df.as_mut())
}

pub fn run_league(env: &Env, pool: &PolicyPool, cfg: &LeagueConfig) -> Result<Vec<EpisodeRecord>, LeagueError> {
    validate(env, cfg)?;
    let specs = league_specs(cfg);
    if cfg.bandit_learning {
        return Ok(run_learning_league(env, pool, cfg, &specs));
    }
    let records = if cfg.parallel {
        specs.par_iter().map(|s| run_match(env, pool, s, cfg.master_seed)).collect()
    } else {
        specs.iter().map(|s| run_match(env, pool, s, cfg.master_seed)).collect()
    };
    Ok(records)
}

/// Sequential league in canonical order where one bandit instance keeps
/// learning across all of its games.
fn run_learning_league(env: &Env, pool: &PolicyPool, cfg: &LeagueConfig, specs: &[MatchSpec]) -> Vec<EpisodeRecord> {
    let mut bandit = BanditPolicy::new(pool.bandit.clone()).learning(true);
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let seeds = episode_seeds(cfg.master_seed, spec);
        let judge = env.config().judge(&spec.judge).expect("judge validated");
        let build = |role: Role| -> Option<Box<dyn Policy>> {
            let kind: PolicyKind = spec.policy_for(role).parse().expect("spec built from kinds");
            let seed = if role == Role::Plaintiff { seeds.plaintiff } else { seeds.defendant };
            (kind != PolicyKind::Bandit).then(|| pool.make(kind, seed))
        };
        let (mut pl, mut df) = (build(Role::Plaintiff), build(Role::Defendant));
        let rec = match (pl.as_mut(), df.as_mut()) {
            (Some(p), Some(d)) => run_episode(env, spec, judge, seeds, p.as_mut(), d.as_mut()),
            (None, Some(d)) => run_episode(env, spec, judge, seeds, &mut bandit, d.as_mut()),
            (Some(p), None) => run_episode(env, spec, judge, seeds, p.as_mut(), &mut bandit),
            (None, None) => unreachable!("self-play is excluded"),
        };
        out.push(rec);
    }
    out
}
