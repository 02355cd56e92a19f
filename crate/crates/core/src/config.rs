//! Environment configuration. Every constant the dynamics, observation and
//! metrics use lives here with its default.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::state::JudgeProfile;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Per-token base dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenConstants {
    pub request_fee: f64,
    /// Burden per custodian, scaled by `1 + complexity`.
    pub request_burden_per_custodian: f64,
    pub object_fee: f64,
    /// Fraction of the pending request's burden removed when an objection is sustained.
    pub object_relief: f64,
    pub motion_fee: f64,
    pub motion_granted_burden: f64,
    pub motion_denied_burden: f64,
    pub respond_fee: f64,
    pub compel_fee: f64,
    pub compel_granted_burden: f64,
    pub sanctions_fee: f64,
    pub sanctions_granted_penalty: f64,
    /// Added to the mover's sanction risk for the step when the motion is denied.
    pub sanctions_denied_exposure: f64,
    pub meet_confer_relief: f64,
    pub venue_fee: f64,
    /// Own turns FILE_MOTION stays unavailable after CHANGE_VENUE.
    pub venue_motion_lock: u32,
    /// Fees a party pays per unit of burden added to it during a step.
    pub compliance_fee_per_burden: f64,
}

impl Default for TokenConstants {
    fn default() -> Self {
        TokenConstants {
            request_fee: 0.5,
            request_burden_per_custodian: 0.08,
            object_fee: 0.3,
            object_relief: 0.3,
            motion_fee: 1.0,
            motion_granted_burden: 2.0,
            motion_denied_burden: 0.5,
            respond_fee: 0.6,
            compel_fee: 0.8,
            compel_granted_burden: 1.5,
            sanctions_fee: 1.0,
            sanctions_granted_penalty: 3.0,
            sanctions_denied_exposure: 0.2,
            meet_confer_relief: 0.5,
            venue_fee: 1.5,
            venue_motion_lock: 1,
            compliance_fee_per_burden: 1.0,
        }
    }
}

impl TokenConstants {
    /// Multiplies every fee and burden amount by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        TokenConstants {
            request_fee: self.request_fee * factor,
            request_burden_per_custodian: self.request_burden_per_custodian * factor,
            object_fee: self.object_fee * factor,
            motion_fee: self.motion_fee * factor,
            motion_granted_burden: self.motion_granted_burden * factor,
            motion_denied_burden: self.motion_denied_burden * factor,
            respond_fee: self.respond_fee * factor,
            compel_fee: self.compel_fee * factor,
            compel_granted_burden: self.compel_granted_burden * factor,
            sanctions_fee: self.sanctions_fee * factor,
            meet_confer_relief: self.meet_confer_relief * factor,
            venue_fee: self.venue_fee * factor,
            compliance_fee_per_burden: self.compliance_fee_per_burden * factor,
            ..self.clone()
        }
    }
}

/// Judge and oracle coefficients: grant probability, sanction risk and
/// proportionality proxies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Grant probability moves by this much per unit of (merits - 0.5).
    pub merits_slope: f64,
    pub grant_floor: f64,
    pub grant_ceiling: f64,
    /// Sanction risk added per recent aggressive token.
    pub aggressive_weight: f64,
    /// History entries scanned for recent aggressive tokens.
    pub aggressive_window: usize,
    /// Penalty when the judge sanctions the mover of a motion.
    pub judge_sanction_penalty: f64,
    /// Custodian count at which a request stops being proportional.
    pub proportional_custodians: f64,
    /// Judgment draw: plaintiff win probability floor/ceiling.
    pub judgment_floor: f64,
    pub judgment_ceiling: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            merits_slope: 0.3,
            grant_floor: 0.05,
            grant_ceiling: 0.95,
            aggressive_weight: 0.1,
            aggressive_window: 10,
            judge_sanction_penalty: 2.0,
            proportional_custodians: 5.0,
            judgment_floor: 0.05,
            judgment_ceiling: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Normalizers {
    /// Burdens are divided by this for the observation.
    pub burden: f64,
}

impl Default for Normalizers {
    fn default() -> Self {
        Normalizers { burden: 20.0 }
    }
}

/// Exploit-score definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploitConfig {
    /// Guard for the cost-inflation denominator.
    pub epsilon: f64,
    pub settlement_clip: f64,
    pub compliance_per_sanction: f64,
    /// cost_inflation, calendar_pressure, settlement_pressure, compliance_margin.
    pub weights: [f64; 4],
    pub flag_threshold: f64,
}

impl Default for ExploitConfig {
    fn default() -> Self {
        ExploitConfig {
            epsilon: 0.01,
            settlement_clip: 2.0,
            compliance_per_sanction: 0.5,
            weights: [0.35, 0.25, 0.25, 0.15],
            flag_threshold: 0.6,
        }
    }
}

/// Coefficients of the per-step shaped reward used for PPO.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapedRewardConfig {
    pub opponent_burden: f64,
    pub own_cost: f64,
    pub own_burden: f64,
    pub terminal_bonus: f64,
}

impl Default for ShapedRewardConfig {
    fn default() -> Self {
        ShapedRewardConfig { opponent_burden: 0.20, own_cost: 0.01, own_burden: 0.01, terminal_bonus: 5.0 }
    }
}

/// Weights of the general per-step reward: opponent cost, delay credit,
/// outcome bonus, sanction penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub opponent_cost: f64,
    pub delay_credit: f64,
    pub outcome_bonus: f64,
    pub sanction_penalty: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights { opponent_cost: 1.0, delay_credit: 1.0, outcome_bonus: 5.0, sanction_penalty: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub initial_budget: f64,
    pub max_steps: u32,
    pub merits_range: [f64; 2],
    /// Progress per step with no gate active.
    pub progress_rate: f64,
    /// An offer is accepted at or above `factor * offeree merits * offeree budget`.
    pub settlement_accept_factor: f64,
    pub tokens: TokenConstants,
    pub oracle: OracleConfig,
    pub normalizers: Normalizers,
    pub exploit: ExploitConfig,
    pub shaped_reward: ShapedRewardConfig,
    pub reward_weights: RewardWeights,
    pub judges: IndexMap<String, JudgeProfile>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        let mut judges = IndexMap::new();
        judges.insert("permissive".to_string(), JudgeProfile::PERMISSIVE);
        judges.insert("strict".to_string(), JudgeProfile::STRICT);
        EnvConfig {
            initial_budget: 100.0,
            max_steps: 200,
            merits_range: [0.3, 0.7],
            progress_rate: 0.006,
            settlement_accept_factor: 0.8,
            tokens: TokenConstants::default(),
            oracle: OracleConfig::default(),
            normalizers: Normalizers::default(),
            exploit: ExploitConfig::default(),
            shaped_reward: ShapedRewardConfig::default(),
            reward_weights: RewardWeights::default(),
            judges,
        }
    }
}

impl EnvConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: EnvConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.initial_budget.is_finite() && self.initial_budget > 0.0) {
            return bad("initial_budget must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        let [lo, hi] = self.merits_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return bad("merits_range must be an interval inside [0, 1]");
        }
        if !(self.progress_rate.is_finite() && self.progress_rate >= 0.0) {
            return bad("progress_rate must be nonnegative");
        }
        if self.normalizers.burden <= 0.0 {
            return bad("burden normalizer must be positive");
        }
        for (name, j) in &self.judges {
            if !j.is_valid() {
                return Err(ConfigError::Invalid(format!("judge `{name}` has a field outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn judge(&self, name: &str) -> Option<JudgeProfile> {
        self.judges.get(name).copied()
    }

    /// Copy with every per-token cost and burden constant multiplied by `1 + noise`.
    pub fn with_noise(&self, noise: f64) -> Self {
        EnvConfig { tokens: self.tokens.scaled(1.0 + noise), ..self.clone() }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
