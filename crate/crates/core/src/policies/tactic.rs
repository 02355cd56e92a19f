//! High-level tactics and the scripted tactic-to-token instantiator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PolicyContext;
use crate::token::{ActionKind, ActionToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tactic {
    Delay,
    BurdenOpp,
    SeekDismissal,
    PressSettlement,
    Conserve,
}

impl Tactic {
    pub const ALL: [Tactic; 5] =
        [Tactic::Delay, Tactic::BurdenOpp, Tactic::SeekDismissal, Tactic::PressSettlement, Tactic::Conserve];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tactic::Delay => "DELAY",
            Tactic::BurdenOpp => "BURDEN_OPP",
            Tactic::SeekDismissal => "SEEK_DISMISSAL",
            Tactic::PressSettlement => "PRESS_SETTLEMENT",
            Tactic::Conserve => "CONSERVE",
        }
    }
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tactic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tactic::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| format!("unknown tactic `{s}`"))
    }
}

/// Deterministic tactic-to-token mapping; always returns a legal token.
pub fn instantiate(tactic: Tactic, ctx: &PolicyContext<'_>) -> ActionToken {
    let legal = |k| ctx.legal.contains(k);
    let token = match tactic {
        Tactic::Delay => ctx
            .rules
            .exemplar_params(ActionKind::FileProceeding)
            .filter(|_| legal(ActionKind::FileProceeding))
            .map(|params| ActionToken { kind: ActionKind::FileProceeding, params }),
        Tactic::BurdenOpp => {
            if legal(ActionKind::RequestDocs) {
                Some(ActionToken::new(ActionKind::RequestDocs).with("custodians", 10).with("complexity", 0.6))
            } else {
                Some(ActionToken::new(ActionKind::MoveCompel))
            }
        }
        Tactic::SeekDismissal => Some(ActionToken::new(ActionKind::FileMotion).with("aggr", 0.5)),
        Tactic::PressSettlement => {
            let amount = 0.5 * ctx.initial_budget * (1.0 - ctx.observation.own_merits());
            Some(ActionToken::new(ActionKind::SettlementOffer).with("amount", amount))
        }
        Tactic::Conserve => Some(ActionToken::new(ActionKind::MeetConfer)),
    };
    token.filter(|t| legal(t.kind)).unwrap_or_else(ActionToken::noop)
}
