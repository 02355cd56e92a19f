//! Robustness sweeps: replay a fixed slice of cross-play games under a
//! perturbed environment and summarise the mean composite.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bootstrap_mean_ci, EvalError};
use crate::config::EnvConfig;
use crate::env::Env;
use crate::harness::{league_specs, run_match, EpisodeRecord, LeagueConfig, MatchSpec, PolicyPool};
use crate::rng::derive_seed;
use crate::rules::RuleDocument;
use crate::state::Role;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Overrides every judge's sanction tendency.
    Sanction,
    /// Scales every per-token cost and burden constant by `1 + value`.
    Noise,
}

impl SweepAxis {
    pub fn points(self) -> [f64; 5] {
        match self {
            SweepAxis::Sanction => [0.10, 0.25, 0.50, 0.75, 0.90],
            SweepAxis::Noise => [-0.20, -0.10, 0.00, 0.10, 0.20],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Sanction => "sanction",
            SweepAxis::Noise => "noise",
        }
    }

    /// The environment configuration at one point of the axis.
    pub fn apply(self, base: &EnvConfig, value: f64) -> EnvConfig {
        match self {
            SweepAxis::Sanction => {
                let mut cfg = base.clone();
                for j in cfg.judges.values_mut() {
                    j.sanction_tendency = value;
                }
                cfg
            }
            SweepAxis::Noise => base.with_noise(value),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sanction" | "sanction_tendency" => Ok(SweepAxis::Sanction),
            "noise" => Ok(SweepAxis::Noise),
            _ => Err(format!("unknown sweep axis `{s}` (expected sanction or noise)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    /// Policies, judges, regime, master seed and parallelism of the games.
    pub league: LeagueConfig,
    pub episodes: usize,
    pub resamples: usize,
}

impl SweepConfig {
    pub fn new(axis: SweepAxis, league: LeagueConfig) -> Self {
        SweepConfig { axis, league, episodes: 60, resamples: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: SweepAxis,
    pub value: f64,
    pub mean_composite: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub flag_rate: f64,
    pub n_episodes: usize,
    pub config_hash: String,
}

/// The games played at every point: episode `k` takes cross-play cell
/// `k mod cells` (pair, judge, role assignment) at seed index `k div cells`.
pub fn sweep_specs(league: &LeagueConfig, episodes: usize) -> Vec<MatchSpec> {
    let cells = league_specs(&LeagueConfig { seeds: vec![0], ..league.clone() });
    if cells.is_empty() {
        return Vec::new();
    }
    (0..episodes).map(|k| MatchSpec { seed: (k / cells.len()) as u64, ..cells[k % cells.len()].clone() }).collect()
}

/// Mean of the two roles' composites.
pub fn episode_composite(r: &EpisodeRecord) -> f64 {
    0.5 * (r.composite(Role::Plaintiff) + r.composite(Role::Defendant))
}

pub fn run_point(
    base: &EnvConfig,
    rules: &Arc<RuleDocument>,
    pool: &PolicyPool,
    cfg: &SweepConfig,
    value: f64,
) -> Result<(SweepPoint, Vec<EpisodeRecord>), EvalError> {
    let env_cfg = cfg.axis.apply(base, value);
    let env = Env::new(env_cfg, Arc::clone(rules))?;
    for j in &cfg.league.judges {
        if env.config().judge(j).is_none() {
            return Err(EvalError::UnknownJudge(j.clone()));
        }
    }
    let specs = sweep_specs(&cfg.league, cfg.episodes);
    if specs.is_empty() {
        return Err(EvalError::TooFewPolicies);
    }
    let master = cfg.league.master_seed;
    let records: Vec<EpisodeRecord> = if cfg.league.parallel {
        specs.par_iter().map(|s| run_match(&env, pool, s, master)).collect()
    } else {
        specs.iter().map(|s| run_match(&env, pool, s, master)).collect()
    };
    let values: Vec<f64> = records.iter().map(episode_composite).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let label = format!("sweep|{}|{value}", cfg.axis);
    let (ci_low, ci_high) = bootstrap_mean_ci(&values, cfg.resamples, 0.95, derive_seed(master, &label));
    let threshold = env.config().exploit.flag_threshold;
    let flagged =
        records.iter().flat_map(|r| Role::BOTH.map(|role| r.composite(role))).filter(|&c| c >= threshold).count();
    let point = SweepPoint {
        axis: cfg.axis,
        value,
        mean_composite: mean,
        ci_low,
        ci_high,
        flag_rate: flagged as f64 / (2 * records.len()) as f64,
        n_episodes: records.len(),
        config_hash: env.config().content_hash(),
    };
    Ok((point, records))
}

/// All five points of the axis.
pub fn run_sweep(
    base: &EnvConfig,
    rules: &Arc<RuleDocument>,
    pool: &PolicyPool,
    cfg: &SweepConfig,
) -> Result<Vec<SweepPoint>, EvalError> {
    cfg.axis.points().iter().map(|&v| run_point(base, rules, pool, cfg, v).map(|(p, _)| p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::PolicyKind;

    #[test]
    fn axis_points_and_parse() {
        assert_eq!(SweepAxis::Sanction.points(), [0.10, 0.25, 0.50, 0.75, 0.90]);
        assert_eq!(SweepAxis::Noise.points(), [-0.20, -0.10, 0.00, 0.10, 0.20]);
        assert_eq!("noise".parse::<SweepAxis>().unwrap(), SweepAxis::Noise);
        assert!("venue".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn zero_noise_keeps_config_hash() {
        let base = EnvConfig::default();
        assert_eq!(SweepAxis::Noise.apply(&base, 0.0).content_hash(), base.content_hash());
        let s = SweepAxis::Sanction.apply(&base, 0.9);
        assert!(s.judges.values().all(|j| j.sanction_tendency == 0.9));
        assert_eq!(s.judges["strict"].grant_rate, base.judges["strict"].grant_rate);
    }

    #[test]
    fn specs_cycle_through_cells() {
        let league = LeagueConfig::default();
        let specs = sweep_specs(&league, 60);
        assert_eq!(specs.len(), 60);
        // 6 pairs x 2 judges x 2 roles
        assert_eq!(specs[24].seed, 1);
        assert_eq!(specs[59].seed, 2);
        assert_eq!(MatchSpec { seed: 0, ..specs[24].clone() }, specs[0]);
        let two = LeagueConfig { policies: vec![PolicyKind::Heuristic, PolicyKind::Llm], ..league };
        assert_eq!(sweep_specs(&two, 8).iter().filter(|s| s.i_role == Role::Plaintiff).count(), 4);
    }
}
