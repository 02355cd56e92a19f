//! Case state: the two parties, the judge, active gates and the filing history.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rules::ActiveGate;
use crate::token::ActionToken;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Plaintiff,
    Defendant,
}

impl Role {
    pub const BOTH: [Role; 2] = [Role::Plaintiff, Role::Defendant];

    pub fn opponent(self) -> Role {
        match self {
            Role::Plaintiff => Role::Defendant,
            Role::Defendant => Role::Plaintiff,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Plaintiff => "plaintiff",
            Role::Defendant => "defendant",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stochastic judge parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgeProfile {
    pub grant_rate: f64,
    pub sanction_tendency: f64,
    pub calendar_load: f64,
}

impl JudgeProfile {
    pub const PERMISSIVE: JudgeProfile =
        JudgeProfile { grant_rate: 0.65, sanction_tendency: 0.25, calendar_load: 0.55 };
    pub const STRICT: JudgeProfile = JudgeProfile { grant_rate: 0.35, sanction_tendency: 0.70, calendar_load: 0.60 };

    pub fn is_valid(&self) -> bool {
        [self.grant_rate, self.sanction_tendency, self.calendar_load].iter().all(|x| (0.0..=1.0).contains(x))
    }
}

/// A request or motion served on a party that it has not yet answered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendingRequest {
    /// Burden the request imposed on the served party.
    pub burden: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyState {
    pub budget: f64,
    pub burden: f64,
    /// Cumulative spend; never decreases.
    pub fees: f64,
    pub sanction_count: u32,
    pub sanction_penalty: f64,
    pub merits: f64,
    pub delay_credit: f64,
    pub settlement_offers_made: Vec<f64>,
    /// Discovery request served on this party and not yet objected to.
    pub pending_request: Option<PendingRequest>,
    /// A motion filed against this party and not yet answered.
    pub pending_motion: bool,
    /// Own turns during which FILE_MOTION is unavailable (venue transfer).
    pub motion_lock: u32,
}

impl PartyState {
    pub fn new(budget: f64, merits: f64) -> Self {
        PartyState {
            budget,
            burden: 0.0,
            fees: 0.0,
            sanction_count: 0,
            sanction_penalty: 0.0,
            merits,
            delay_credit: 0.0,
            settlement_offers_made: Vec::new(),
            pending_request: None,
            pending_motion: false,
            motion_lock: 0,
        }
    }

    /// Charges a fee against the remaining budget, capped at what is left.
    /// Returns the amount actually charged.
    pub fn charge_fee(&mut self, amount: f64) -> f64 {
        let charged = amount.max(0.0).min(self.budget);
        self.fees += charged;
        self.budget -= charged;
        charged
    }

    /// Records one sanction and charges its penalty (capped at the remaining budget).
    pub fn sanction(&mut self, penalty: f64) -> f64 {
        let charged = penalty.max(0.0).min(self.budget);
        self.sanction_count += 1;
        self.sanction_penalty += charged;
        self.budget -= charged;
        charged
    }

    pub fn add_burden(&mut self, delta: f64) -> f64 {
        let before = self.burden;
        self.burden = (self.burden + delta).max(0.0);
        self.burden - before
    }
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    PlaintiffWin,
    DefendantWin,
    Settlement,
    MaxStepsJudgment,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::PlaintiffWin => "plaintiff_win",
            OutcomeKind::DefendantWin => "defendant_win",
            OutcomeKind::Settlement => "settlement",
            OutcomeKind::MaxStepsJudgment => "max_steps_judgment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Withdrawal,
    BudgetExhausted,
    Judgment,
    Settlement,
    MaxSteps,
}

impl EndReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EndReason::Withdrawal => "withdrawal",
            EndReason::BudgetExhausted => "budget_exhausted",
            EndReason::Judgment => "judgment",
            EndReason::Settlement => "settlement",
            EndReason::MaxSteps => "max_steps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// Prevailing party; absent only for settlements.
    pub winner: Option<Role>,
    pub reason: EndReason,
    pub settlement_amount: Option<f64>,
}

impl Outcome {
    pub fn win(winner: Role, reason: EndReason) -> Self {
        let kind = match winner {
            Role::Plaintiff => OutcomeKind::PlaintiffWin,
            Role::Defendant => OutcomeKind::DefendantWin,
        };
        Outcome { kind, winner: Some(winner), reason, settlement_amount: None }
    }

    pub fn max_steps(winner: Role) -> Self {
        Outcome {
            kind: OutcomeKind::MaxStepsJudgment,
            winner: Some(winner),
            reason: EndReason::MaxSteps,
            settlement_amount: None,
        }
    }

    pub fn settlement(amount: f64) -> Self {
        Outcome {
            kind: OutcomeKind::Settlement,
            winner: None,
            reason: EndReason::Settlement,
            settlement_amount: Some(amount),
        }
    }

    /// Match score for `role`: 1 for a win, 0.5 for a settlement, 0 for a loss.
    pub fn score(&self, role: Role) -> f64 {
        match self.winner {
            None => 0.5,
            Some(w) if w == role => 1.0,
            Some(_) => 0.0,
        }
    }

    /// +1 / -1 for the decided-by-play outcomes, 0 for settlements and
    /// max-steps judgments.
    pub fn terminal_sign(&self, role: Role) -> f64 {
        match self.kind {
            OutcomeKind::PlaintiffWin | OutcomeKind::DefendantWin => {
                if self.winner == Some(role) {
                    1.0
                } else {
                    -1.0
                }
            }
            OutcomeKind::Settlement | OutcomeKind::MaxStepsJudgment => 0.0,
        }
    }
}

/// Judge disposition of a step, when one was needed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Ruling {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub granted: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grant_probability: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub actor_sanctioned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settlement_accepted: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub rules_fired: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub gates_expired: Vec<String>,
    /// Set when the submitted token was replaced by NOOP.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substituted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub t: u32,
    pub actor: Role,
    pub token: ActionToken,
    pub ruling: Ruling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseState {
    pub plaintiff: PartyState,
    pub defendant: PartyState,
    pub judge: JudgeProfile,
    pub active_gates: Vec<ActiveGate>,
    pub history: Vec<HistoryEntry>,
    pub citations: Vec<String>,
    pub t: u32,
    pub progress: f64,
    pub terminated: Option<Outcome>,
}

impl CaseState {
    pub fn party(&self, role: Role) -> &PartyState {
        match role {
            Role::Plaintiff => &self.plaintiff,
            Role::Defendant => &self.defendant,
        }
    }

    pub fn party_mut(&mut self, role: Role) -> &mut PartyState {
        match role {
            Role::Plaintiff => &mut self.plaintiff,
            Role::Defendant => &mut self.defendant,
        }
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated.is_some()
    }

    pub fn gate(&self, name: &str) -> Option<&ActiveGate> {
        self.active_gates.iter().find(|g| g.name == name)
    }

    /// Number of own aggressive tokens among the last `window` history entries.
    pub fn recent_aggressive(&self, role: Role, window: usize) -> usize {
        self.history.iter().rev().take(window).filter(|h| h.actor == role && h.token.kind.is_aggressive()).count()
    }
}
