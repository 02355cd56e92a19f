//! Turn-based two-party litigation environment.
//!
//! One call to [`Env::step`] is one environment step: a single party's move.
//! Within a step the dynamics run in a fixed order:
//!
//! 1. base token dynamics (fees, burdens, offers),
//! 2. rule matching and effect application,
//! 3. judge resolution of objections, motions, compel and sanctions, then
//!    compliance fees on any burden added during the step,
//! 4. settlement acceptance,
//! 5. gate countdown (gates set during this step start counting next step),
//! 6. clock and progress,
//! 7. termination.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EnvConfig;
use crate::rng::derive_seed;
use crate::rules::{apply_effects, tick_gates_except, EffectLog, Field, RuleDocument};
use crate::state::{
    CaseState, EndReason, HistoryEntry, JudgeProfile, Outcome, PartyState, PendingRequest, Role, Ruling,
};
use crate::token::{ActionKind, ActionSet, ActionToken, ParamError};

pub const OBS_DIM: usize = 13;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error("episode already terminated")]
    Terminated,
    #[error("{0} is blocked for the {1}")]
    Blocked(ActionKind, Role),
    #[error("invalid params for {0}: {1}")]
    InvalidParams(ActionKind, ParamError),
}

/// Fixed-order 13-element feature vector seen by a party.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub const NAMES: [&'static str; OBS_DIM] = [
        "own_budget_norm",
        "opp_budget_norm",
        "own_burden_norm",
        "opp_burden_norm",
        "own_fees_norm",
        "opp_fees_norm",
        "grant_rate",
        "sanction_tendency",
        "calendar_load",
        "own_merits",
        "opp_merits",
        "progress",
        "active_gate_fraction",
    ];

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn own_budget_norm(&self) -> f64 {
        self.0[0]
    }

    pub fn own_burden_norm(&self) -> f64 {
        self.0[2]
    }

    pub fn own_merits(&self) -> f64 {
        self.0[9]
    }
}

/// Per-party change over one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PartyDelta {
    pub budget: f64,
    pub burden: f64,
    pub fees: f64,
    pub sanction_count: u32,
    pub sanction_penalty: f64,
    pub delay_credit: f64,
}

impl PartyDelta {
    fn between(before: &PartyState, after: &PartyState) -> Self {
        PartyDelta {
            budget: after.budget - before.budget,
            burden: after.burden - before.burden,
            fees: after.fees - before.fees,
            sanction_count: after.sanction_count - before.sanction_count,
            sanction_penalty: after.sanction_penalty - before.sanction_penalty,
            delay_credit: after.delay_credit - before.delay_credit,
        }
    }

    /// Spend charged this step: fees plus sanction penalties.
    pub fn cost(&self) -> f64 {
        self.fees + self.sanction_penalty
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub t: u32,
    pub actor: Role,
    pub token: ActionToken,
    pub ruling: Ruling,
    pub plaintiff: PartyDelta,
    pub defendant: PartyDelta,
    pub effects: EffectLog,
    pub outcome: Option<Outcome>,
}

impl StepReport {
    pub fn delta(&self, role: Role) -> &PartyDelta {
        match role {
            Role::Plaintiff => &self.plaintiff,
            Role::Defendant => &self.defendant,
        }
    }
}

/// Per-step shaped reward:
/// `0.20·Δopp_burden − 0.01·Δown_cost − 0.01·Δown_burden`, plus ±5 when a
/// decisive outcome lands on this step.
pub fn shaped_reward(report: &StepReport, role: Role, cfg: &EnvConfig) -> f64 {
    let c = &cfg.shaped_reward;
    let own = report.delta(role);
    let opp = report.delta(role.opponent());
    let mut r = c.opponent_burden * opp.burden - c.own_cost * own.cost() - c.own_burden * own.burden;
    if let Some(outcome) = &report.outcome {
        r += c.terminal_bonus * outcome.terminal_sign(role);
    }
    r
}

/// General per-step reward `w1·OpponentCost + w2·DelayCredit + w3·OutcomeBonus − w4·SanctionPenalty`.
pub fn general_reward(report: &StepReport, role: Role, w: &crate::config::RewardWeights) -> f64 {
    let own = report.delta(role);
    let opp = report.delta(role.opponent());
    let bonus = report.outcome.as_ref().map_or(0.0, |o| o.terminal_sign(role));
    w.opponent_cost * opp.fees + w.delay_credit * own.delay_credit + w.outcome_bonus * bonus
        - w.sanction_penalty * own.sanction_penalty
}

#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    rules: Arc<RuleDocument>,
}

impl Env {
    pub fn new(config: EnvConfig, rules: Arc<RuleDocument>) -> Result<Self, EnvError> {
        config.validate().map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        if rules.is_empty() {
            return Err(EnvError::InvalidConfig("rule document is empty".into()));
        }
        Ok(Env { config, rules })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn rules(&self) -> &RuleDocument {
        &self.rules
    }

    pub fn rules_arc(&self) -> Arc<RuleDocument> {
        Arc::clone(&self.rules)
    }

    /// Fresh case: full budgets, merits drawn from the seeded stream.
    pub fn reset(&self, judge: JudgeProfile, seed: u64) -> CaseState {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "merits"));
        let [lo, hi] = self.config.merits_range;
        let mut draw = || if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        let pl_merits = draw();
        let df_merits = draw();
        let budget = self.config.initial_budget;
        CaseState {
            plaintiff: PartyState::new(budget, pl_merits),
            defendant: PartyState::new(budget, df_merits),
            judge,
            active_gates: Vec::new(),
            history: Vec::new(),
            citations: Vec::new(),
            t: 0,
            progress: 0.0,
            terminated: None,
        }
    }

    /// All tokens not blocked by an active gate (or the mover's venue lock).
    pub fn legal_actions(&self, state: &CaseState, role: Role) -> Result<ActionSet, EnvError> {
        if state.is_terminated() {
            return Err(EnvError::Terminated);
        }
        let blocked = self.rules.blocked_set(state);
        let mut legal: ActionSet = ActionKind::ALL.into_iter().filter(|k| !blocked.contains(*k)).collect();
        if state.party(role).motion_lock > 0 {
            legal.remove(ActionKind::FileMotion);
        }
        legal.insert(ActionKind::Noop);
        Ok(legal)
    }

    pub fn observe(&self, state: &CaseState, role: Role) -> Observation {
        let b = self.config.initial_budget;
        let bn = self.config.normalizers.burden;
        let own = state.party(role);
        let opp = state.party(role.opponent());
        let unit = |x: f64| x.clamp(0.0, 1.0);
        let blocked = self.rules.blocked_set(state).len() as f64 / ActionKind::COUNT as f64;
        Observation([
            unit(own.budget / b),
            unit(opp.budget / b),
            unit(own.burden / bn),
            unit(opp.burden / bn),
            unit(own.fees / b),
            unit(opp.fees / b),
            state.judge.grant_rate,
            state.judge.sanction_tendency,
            state.judge.calendar_load,
            own.merits,
            opp.merits,
            state.progress,
            blocked,
        ])
    }

    pub fn grant_probability(&self, state: &CaseState, actor: Role) -> f64 {
        let o = &self.config.oracle;
        (state.judge.grant_rate + o.merits_slope * (state.party(actor).merits - 0.5))
            .clamp(o.grant_floor, o.grant_ceiling)
    }

    /// Oracle sanction-risk proxy for the actor's next aggressive move.
    pub fn sanction_risk(&self, state: &CaseState, actor: Role, aggr: f64) -> f64 {
        let o = &self.config.oracle;
        let recent = state.recent_aggressive(actor, o.aggressive_window) as f64;
        (o.aggressive_weight * recent + aggr).clamp(0.0, 1.0)
    }

    /// Oracle proportionality proxy for a discovery request.
    pub fn proportionality(&self, custodians: f64) -> f64 {
        if custodians <= 0.0 {
            1.0
        } else {
            (self.config.oracle.proportional_custodians / custodians).min(1.0)
        }
    }

    pub fn step(
        &self,
        state: &mut CaseState,
        actor: Role,
        action: &ActionToken,
        rng: &mut dyn RngCore,
    ) -> Result<StepReport, EnvError> {
        let legal = self.legal_actions(state, actor)?;
        if !legal.contains(action.kind) {
            return Err(EnvError::Blocked(action.kind, actor));
        }
        action.validate_params().map_err(|e| EnvError::InvalidParams(action.kind, e))?;

        let before = (state.plaintiff.clone(), state.defendant.clone());
        let k = &self.config.tokens;
        let opp = actor.opponent();
        let mut ruling = Ruling::default();
        let mut outcome: Option<Outcome> = None;
        state.party_mut(actor).motion_lock = 0;

        // (1) base dynamics
        match action.kind {
            ActionKind::Noop | ActionKind::FileProceeding | ActionKind::ReferenceAuthority => {}
            ActionKind::RequestDocs => {
                state.party_mut(actor).charge_fee(k.request_fee);
                let custodians = action.num_or("custodians", 0.0);
                let complexity = action.num_or("complexity", 0.0);
                let burden = k.request_burden_per_custodian * custodians * (1.0 + complexity);
                let served = state.party_mut(opp);
                served.add_burden(burden);
                served.pending_request = Some(PendingRequest { burden });
            }
            ActionKind::ObjectRequest => {
                state.party_mut(actor).charge_fee(k.object_fee);
            }
            ActionKind::FileMotion => {
                state.party_mut(actor).charge_fee(k.motion_fee);
                state.party_mut(opp).pending_motion = true;
            }
            ActionKind::RespondMotion => {
                let me = state.party_mut(actor);
                me.charge_fee(k.respond_fee);
                me.pending_motion = false;
            }
            ActionKind::MoveCompel => {
                state.party_mut(actor).charge_fee(k.compel_fee);
            }
            ActionKind::MoveSanctions => {
                state.party_mut(actor).charge_fee(k.sanctions_fee);
            }
            ActionKind::MeetConfer => {
                state.plaintiff.add_burden(-k.meet_confer_relief);
                state.defendant.add_burden(-k.meet_confer_relief);
            }
            ActionKind::SettlementOffer => {
                let amount = action.num_or("amount", 0.0);
                state.party_mut(actor).settlement_offers_made.push(amount);
            }
            ActionKind::ChangeVenue => {
                let me = state.party_mut(actor);
                me.charge_fee(k.venue_fee);
                me.motion_lock = k.venue_motion_lock;
            }
            ActionKind::Withdraw => {
                outcome = Some(Outcome::win(opp, EndReason::Withdrawal));
            }
        }

        // (2) rules
        let mut effects = EffectLog::new();
        if outcome.is_none() {
            let matched = self.rules.match_rules(action.kind, &action.params);
            ruling.rules_fired = matched.iter().map(|r| r.name.clone()).collect();
            effects = apply_effects(&matched, state, actor, &action.params, rng);
        }

        // (3) judge
        if outcome.is_none() {
            self.resolve_before_judge(state, actor, action, &mut ruling, rng);
        }

        // compliance cost for burden imposed this step
        if outcome.is_none() {
            let rate = k.compliance_fee_per_burden;
            for (role, prior) in [(Role::Plaintiff, &before.0), (Role::Defendant, &before.1)] {
                let added = state.party(role).burden - prior.burden;
                if added > 0.0 {
                    state.party_mut(role).charge_fee(rate * added);
                }
            }
        }

        // (4) settlement
        if outcome.is_none() && action.kind == ActionKind::SettlementOffer {
            let amount = action.num_or("amount", 0.0);
            let offeree = state.party(opp);
            let reservation = self.config.settlement_accept_factor * offeree.merits * offeree.budget;
            let accepted = amount >= reservation;
            ruling.settlement_accepted = Some(accepted);
            if accepted {
                outcome = Some(Outcome::settlement(amount));
            }
        }

        // (5) gates
        let fresh: Vec<String> = effects
            .iter()
            .filter(|e| e.effect == "set_gate" && !e.noop)
            .filter_map(|e| match &e.field {
                Field::Gate(name) => Some(name.clone()),
                _ => None,
            })
            .collect();
        ruling.gates_expired = tick_gates_except(state, &fresh);

        // (6) clock
        state.t += 1;
        let gate_flag = if state.active_gates.is_empty() { 0.0 } else { 1.0 };
        state.progress =
            (state.progress + self.config.progress_rate * (1.0 - state.judge.calendar_load * gate_flag)).min(1.0);

        // (7) termination
        if outcome.is_none() {
            outcome = self.check_termination(state, actor, rng);
        }
        state.terminated = outcome.clone();

        state.history.push(HistoryEntry { t: state.t - 1, actor, token: action.clone(), ruling: ruling.clone() });

        Ok(StepReport {
            t: state.t - 1,
            actor,
            token: action.clone(),
            ruling,
            plaintiff: PartyDelta::between(&before.0, &state.plaintiff),
            defendant: PartyDelta::between(&before.1, &state.defendant),
            effects,
            outcome,
        })
    }

    fn resolve_before_judge(
        &self,
        state: &mut CaseState,
        actor: Role,
        action: &ActionToken,
        ruling: &mut Ruling,
        rng: &mut dyn RngCore,
    ) {
        let k = &self.config.tokens;
        let opp = actor.opponent();
        match action.kind {
            ActionKind::ObjectRequest => {
                let Some(pending) = state.party(actor).pending_request else {
                    return;
                };
                let p = self.grant_probability(state, actor);
                let sustained = rng.gen::<f64>() < p;
                ruling.grant_probability = Some(p);
                ruling.granted = Some(sustained);
                let me = state.party_mut(actor);
                if sustained {
                    me.add_burden(-k.object_relief * pending.burden);
                }
                me.pending_request = None;
            }
            ActionKind::FileMotion | ActionKind::MoveCompel | ActionKind::MoveSanctions => {
                let p = self.grant_probability(state, actor);
                let aggr = action.num_or("aggr", 0.0);
                let risk = self.sanction_risk(state, actor, aggr);
                let granted = rng.gen::<f64>() < p;
                let sanction_draw: f64 = rng.gen();
                ruling.grant_probability = Some(p);
                ruling.granted = Some(granted);
                let mut exposure = 0.0;
                match (action.kind, granted) {
                    (ActionKind::FileMotion, true) => {
                        state.party_mut(opp).add_burden(k.motion_granted_burden);
                    }
                    (ActionKind::FileMotion, false) => {
                        state.party_mut(actor).add_burden(k.motion_denied_burden);
                    }
                    (ActionKind::MoveCompel, true) => {
                        state.party_mut(opp).add_burden(k.compel_granted_burden);
                    }
                    (ActionKind::MoveSanctions, true) => {
                        state.party_mut(opp).sanction(k.sanctions_granted_penalty);
                    }
                    (ActionKind::MoveSanctions, false) => exposure = k.sanctions_denied_exposure,
                    _ => {}
                }
                let p_sanction = state.judge.sanction_tendency * (risk + exposure).clamp(0.0, 1.0);
                if sanction_draw < p_sanction {
                    state.party_mut(actor).sanction(self.config.oracle.judge_sanction_penalty);
                    ruling.actor_sanctioned = true;
                }
            }
            _ => {}
        }
    }

    fn check_termination(&self, state: &CaseState, actor: Role, rng: &mut dyn RngCore) -> Option<Outcome> {
        if state.party(actor).budget <= 0.0 {
            return Some(Outcome::win(actor.opponent(), EndReason::BudgetExhausted));
        }
        if state.party(actor.opponent()).budget <= 0.0 {
            return Some(Outcome::win(actor, EndReason::BudgetExhausted));
        }
        if state.progress >= 1.0 {
            return Some(Outcome::win(self.judgment_winner(state, rng), EndReason::Judgment));
        }
        if state.t >= self.config.max_steps {
            return Some(Outcome::max_steps(self.judgment_winner(state, rng)));
        }
        None
    }

    fn judgment_winner(&self, state: &CaseState, rng: &mut dyn RngCore) -> Role {
        let o = &self.config.oracle;
        let p_plaintiff =
            (0.5 + (state.plaintiff.merits - state.defendant.merits)).clamp(o.judgment_floor, o.judgment_ceiling);
        if rng.gen::<f64>() < p_plaintiff {
            Role::Plaintiff
        } else {
            Role::Defendant
        }
    }
}
