//! Scripted fixtures and human-readable episode traces.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::episode::{run_episode, EpisodeRecord, EpisodeSeeds, MatchSpec};
use super::league::episode_seeds;
use crate::config::{ConfigError, EnvConfig};
use crate::env::{Env, EnvError};
use crate::policies::ScriptedPolicy;
use crate::regimes::Regime;
use crate::rules::RuleError;
use crate::state::{OutcomeKind, Role};
use crate::token::{ActionKind, ActionToken};

/// Discovery loop with a protective motion and procedural replies.
pub const DISCOVERY_LOOP: &str = include_str!("../../fixtures/discovery_loop.json");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fixture: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("fixture env: {0}")]
    Config(#[from] ConfigError),
    #[error("fixture regime: {0}")]
    Regime(String),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("unknown judge profile `{0}`")]
    UnknownJudge(String),
}

/// Two fixed token lists played against each other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub name: String,
    pub regime: String,
    pub judge: String,
    pub seed: u64,
    /// Overrides on top of the default environment configuration.
    #[serde(default)]
    pub env: serde_json::Value,
    pub plaintiff_seq: Vec<ActionToken>,
    pub defendant_seq: Vec<ActionToken>,
}

impl Fixture {
    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn env_config(&self) -> Result<EnvConfig, FixtureError> {
        let text = if self.env.is_null() { "{}".to_string() } else { self.env.to_string() };
        Ok(EnvConfig::from_json(&text)?)
    }

    pub fn spec(&self) -> MatchSpec {
        MatchSpec {
            policy_i: format!("{}:plaintiff", self.name),
            policy_j: format!("{}:defendant", self.name),
            judge: self.judge.clone(),
            seed: self.seed,
            i_role: Role::Plaintiff,
            regime: self.regime.clone(),
        }
    }

    /// Plays both scripts to termination.
    pub fn run(&self, master_seed: u64) -> Result<EpisodeRecord, FixtureError> {
        let regime: Regime = self.regime.parse().map_err(FixtureError::Regime)?;
        let env = Env::new(self.env_config()?, Arc::new(regime.load()?))?;
        let judge = env.config().judge(&self.judge).ok_or_else(|| FixtureError::UnknownJudge(self.judge.clone()))?;
        let spec = self.spec();
        let seeds: EpisodeSeeds = episode_seeds(master_seed, &spec);
        let mut pl = ScriptedPolicy::new(&spec.policy_i, self.plaintiff_seq.clone());
        let mut df = ScriptedPolicy::new(&spec.policy_j, self.defendant_seq.clone());
        Ok(run_episode(&env, &spec, judge, seeds, &mut pl, &mut df))
    }
}

/// Tokens each side played, with trailing NOOPs removed.
pub fn extract_sequences(rec: &EpisodeRecord) -> (Vec<ActionToken>, Vec<ActionToken>) {
    let trimmed = |role| {
        let mut seq: Vec<ActionToken> = rec.tokens_of(role).into_iter().cloned().collect();
        while seq.last().is_some_and(|t| t.kind == ActionKind::Noop) {
            seq.pop();
        }
        seq
    };
    (trimmed(Role::Plaintiff), trimmed(Role::Defendant))
}

fn token_json(t: &ActionToken) -> String {
    serde_json::to_string(t).expect("tokens serialize")
}

fn outcome_line(rec: &EpisodeRecord) -> String {
    let o = &rec.outcome;
    match o.kind {
        OutcomeKind::Settlement => {
            format!("settlement, counted 0.5 (amount {})", o.settlement_amount.unwrap_or(0.0))
        }
        _ => {
            let winner = o.winner.map_or("none", |r| r.as_str());
            format!("{} won by {winner} ({})", o.kind.as_str(), o.reason.as_str())
        }
    }
}

/// Step-by-step rendering followed by the final component breakdown and the
/// two token sequences.
pub fn render_trace(rec: &EpisodeRecord) -> String {
    let mut s = String::new();
    let spec = &rec.spec;
    let _ = writeln!(
        s,
        "episode {} (plaintiff) vs {} (defendant), judge {}, seed {}, regime {}",
        spec.plaintiff(),
        spec.defendant(),
        spec.judge,
        spec.seed,
        spec.regime
    );
    let _ = writeln!(s, "config {}", rec.config_hash);
    for step in &rec.steps {
        let r = &step.report;
        let _ = write!(s, "t={:<4} {:<9} {}", r.t, r.actor.as_str(), token_json(&r.token));
        let ruling = &r.ruling;
        if let Some(g) = ruling.granted {
            let _ = write!(s, " | {}", if g { "granted" } else { "denied" });
            if let Some(p) = ruling.grant_probability {
                let _ = write!(s, " (p={p:.3})");
            }
        }
        if ruling.actor_sanctioned {
            let _ = write!(s, " | sanctioned");
        }
        if let Some(a) = ruling.settlement_accepted {
            let _ = write!(s, " | offer {}", if a { "accepted" } else { "rejected" });
        }
        if !ruling.rules_fired.is_empty() {
            let _ = write!(s, " | rules {}", ruling.rules_fired.join(","));
        }
        if let Some(why) = &ruling.substituted {
            let _ = write!(s, " | substituted NOOP: {why}");
        }
        if !step.active_gates.is_empty() {
            let gates: Vec<String> = step.active_gates.iter().map(|g| format!("{}({})", g.name, g.remaining)).collect();
            let _ = write!(s, " | gates {}", gates.join(","));
        }
        s.push('\n');
    }
    let _ = writeln!(s, "outcome: {}", outcome_line(rec));
    for role in Role::BOTH {
        let p = rec.party(role);
        let c = &p.components;
        let _ = writeln!(
            s,
            "{:<9} fees {:.3} burden {:.3} sanctions {} | cost_inflation {:.3} calendar_pressure {:.3} \
             settlement_pressure {:.3} compliance_margin {:.3} composite {:.3}",
            role.as_str(),
            p.fees,
            p.burden,
            p.sanction_count,
            c.cost_inflation,
            c.calendar_pressure,
            c.settlement_pressure,
            c.compliance_margin,
            c.composite
        );
    }
    for v in &rec.violation_log {
        let _ = writeln!(s, "violation {v}");
    }
    let (pl, df) = extract_sequences(rec);
    for (label, seq) in [("plaintiff_seq", pl), ("defendant_seq", df)] {
        let _ = writeln!(s, "{label}: [");
        for (k, t) in seq.iter().enumerate() {
            let comma = if k + 1 < seq.len() { "," } else { "" };
            let _ = writeln!(s, "  {}{comma}", token_json(t));
        }
        let _ = writeln!(s, "]");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_noops_are_trimmed() {
        let fx = Fixture {
            name: "t".into(),
            regime: "bankruptcy".into(),
            judge: "strict".into(),
            seed: 1,
            env: serde_json::json!({"max_steps": 6}),
            plaintiff_seq: vec![ActionToken::new(ActionKind::MeetConfer)],
            defendant_seq: vec![ActionToken::noop(), ActionToken::new(ActionKind::MeetConfer)],
        };
        let rec = fx.run(0).unwrap();
        assert_eq!(rec.steps.len(), 6);
        let (pl, df) = extract_sequences(&rec);
        assert_eq!(pl, fx.plaintiff_seq);
        assert_eq!(df, fx.defendant_seq);
    }

    #[test]
    fn shipped_fixture_replays_its_scripts() {
        let fx = Fixture::from_json(DISCOVERY_LOOP).unwrap();
        let rec = fx.run(0).unwrap();
        assert!(rec.violation_log.is_empty(), "{:?}", rec.violation_log);
        let (pl, df) = extract_sequences(&rec);
        assert_eq!(pl, fx.plaintiff_seq);
        assert_eq!(df, fx.defendant_seq);
    }

    #[test]
    fn unknown_judge_is_an_error() {
        let fx = Fixture {
            name: "t".into(),
            regime: "tax".into(),
            judge: "lenient".into(),
            seed: 0,
            env: serde_json::Value::Null,
            plaintiff_seq: vec![],
            defendant_seq: vec![],
        };
        assert!(matches!(fx.run(0), Err(FixtureError::UnknownJudge(_))));
    }
}
