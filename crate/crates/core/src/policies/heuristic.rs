//! Fixed rule-list baseline driven by costs and burdens.

use super::{Policy, PolicyContext};
use crate::token::{ActionKind, ActionToken};

#[derive(Debug, Clone, Default)]
pub struct HeuristicPolicy;

impl HeuristicPolicy {
    pub fn choose(ctx: &PolicyContext<'_>) -> ActionToken {
        let legal = |k| ctx.legal.contains(k);
        let obs = &ctx.observation;
        if obs.own_burden_norm() > 0.6 && legal(ActionKind::MeetConfer) {
            ActionToken::new(ActionKind::MeetConfer)
        } else if ctx.pending_request && legal(ActionKind::ObjectRequest) {
            ActionToken::new(ActionKind::ObjectRequest)
        } else if obs.own_budget_norm() < 0.25 && legal(ActionKind::SettlementOffer) {
            ActionToken::new(ActionKind::SettlementOffer).with("amount", 0.3 * ctx.initial_budget)
        } else if ctx.own_turn % 4 == 3 && legal(ActionKind::FileMotion) {
            ActionToken::new(ActionKind::FileMotion).with("aggr", 0.3)
        } else if legal(ActionKind::RequestDocs) {
            ActionToken::new(ActionKind::RequestDocs).with("custodians", 8).with("complexity", 0.5)
        } else {
            ActionToken::noop()
        }
    }
}

impl Policy for HeuristicPolicy {
    fn id(&self) -> &str {
        "heuristic"
    }

    fn act(&mut self, ctx: &mut PolicyContext<'_>) -> ActionToken {
        Self::choose(ctx)
    }
}
