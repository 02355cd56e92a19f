//! Rules-as-code engine.
//!
//! A [`RuleDocument`] declares named gates (temporary blocks on action tokens)
//! and an ordered list of rules. A rule fires when its `when.action` equals the
//! emitted token and its conditions hold against the token's parameters; its
//! effects are then applied to the case state in document order.
//!
//! Re-setting a gate that is already active keeps the longer of the two
//! remaining durations, so a second filing can never shorten a stay.

use indexmap::IndexMap;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::state::{CaseState, Role};
use crate::token::{ActionKind, ActionSet, ParamMap};

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule document is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema error in {location}: {message}")]
    Schema { location: String, message: String },
}

impl RuleError {
    fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        RuleError::Schema { location: location.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub blocks_actions: Vec<ActionKind>,
}

impl GateSpec {
    pub fn blocks(&self, kind: ActionKind) -> bool {
        self.blocks_actions.contains(&kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CondOp {
    Eq,
    In,
    Ge,
    Le,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub param: String,
    pub op: CondOp,
    pub value: Value,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub optional: bool,
}

/// JSON equality, except that numbers compare by value (11 == 11.0).
fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        _ => a == b,
    }
}

impl Condition {
    /// Evaluates the condition against token parameters. An absent param
    /// satisfies an optional condition and fails a required one.
    pub fn holds(&self, params: &ParamMap) -> bool {
        let Some(actual) = params.get(&self.param) else {
            return self.optional;
        };
        match self.op {
            CondOp::Eq => values_equal(actual, &self.value),
            CondOp::In => self.value.as_array().is_some_and(|items| items.iter().any(|v| values_equal(actual, v))),
            CondOp::Ge => match (actual.as_f64(), self.value.as_f64()) {
                (Some(x), Some(bound)) => x >= bound,
                _ => false,
            },
            CondOp::Le => match (actual.as_f64(), self.value.as_f64()) {
                (Some(x), Some(bound)) => x <= bound,
                _ => false,
            },
        }
    }

    fn validate(&self, location: &str) -> Result<(), RuleError> {
        match self.op {
            CondOp::In if !self.value.is_array() => Err(RuleError::schema(location, "op `in` requires a list value")),
            CondOp::Ge | CondOp::Le if !self.value.is_number() => {
                Err(RuleError::schema(location, "ops `ge`/`le` require a numeric value"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Who {
    #[default]
    #[serde(rename = "self")]
    Actor,
    Opponent,
}

impl Who {
    pub fn resolve(self, actor: Role) -> Role {
        match self {
            Who::Actor => actor,
            Who::Opponent => actor.opponent(),
        }
    }
}

fn is_self(w: &Who) -> bool {
    *w == Who::Actor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Effect {
    SetGate {
        gate: String,
        duration: u32,
    },
    ExtendGate {
        gate: String,
        inc: u32,
    },
    AddCost {
        #[serde(default, skip_serializing_if = "is_self")]
        who: Who,
        amount: f64,
    },
    AddBurden {
        #[serde(default, skip_serializing_if = "is_self")]
        who: Who,
        amount: f64,
    },
    /// Moves up to `amount` burden from the other party onto `who`.
    TransferBurden {
        #[serde(default = "opponent", skip_serializing_if = "is_opponent")]
        who: Who,
        amount: f64,
    },
    AddDelayCredit {
        #[serde(default, skip_serializing_if = "is_self")]
        who: Who,
        k: f64,
    },
    AddCitation {
        code_from_params: String,
    },
    /// Judge-sensitive sanction: fires with probability `sanction_tendency`.
    SanctionEvent {
        #[serde(default, skip_serializing_if = "is_self")]
        who: Who,
        amount: f64,
    },
}

fn opponent() -> Who {
    Who::Opponent
}

fn is_opponent(w: &Who) -> bool {
    *w == Who::Opponent
}

impl Effect {
    pub fn type_name(&self) -> &'static str {
        match self {
            Effect::SetGate { .. } => "set_gate",
            Effect::ExtendGate { .. } => "extend_gate",
            Effect::AddCost { .. } => "add_cost",
            Effect::AddBurden { .. } => "add_burden",
            Effect::TransferBurden { .. } => "transfer_burden",
            Effect::AddDelayCredit { .. } => "add_delay_credit",
            Effect::AddCitation { .. } => "add_citation",
            Effect::SanctionEvent { .. } => "sanction_event",
        }
    }

    fn gate_ref(&self) -> Option<&str> {
        match self {
            Effect::SetGate { gate, .. } | Effect::ExtendGate { gate, .. } => Some(gate),
            _ => None,
        }
    }

    fn amount(&self) -> Option<f64> {
        match self {
            Effect::AddCost { amount, .. }
            | Effect::AddBurden { amount, .. }
            | Effect::TransferBurden { amount, .. }
            | Effect::SanctionEvent { amount, .. } => Some(*amount),
            Effect::AddDelayCredit { k, .. } => Some(*k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct When {
    pub action: ActionKind,
    #[serde(default)]
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub name: String,
    pub when: When,
    #[serde(default)]
    pub effects: Vec<Effect>,
}

impl Rule {
    pub fn when_action(&self) -> ActionKind {
        self.when.action
    }

    pub fn matches(&self, action: ActionKind, params: &ParamMap) -> bool {
        self.when.action == action && self.when.conditions.iter().all(|c| c.holds(params))
    }
}

/// A validated regime: gate declarations plus rules. Immutable after load.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDocument {
    #[serde(default)]
    pub gates: IndexMap<String, GateSpec>,
    #[serde(default)]
    pub rules: Vec<Rule>,
}

/// A gate currently in force.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveGate {
    pub name: String,
    pub remaining: u32,
}

/// Parses and validates a rule document.
pub fn load_rules(document_text: &str) -> Result<RuleDocument, RuleError> {
    let raw: Value = serde_json::from_str(document_text)?;
    let doc: RuleDocument = serde_json::from_value(raw).map_err(|e| RuleError::schema("document", e.to_string()))?;
    doc.validate()?;
    Ok(doc)
}

impl RuleDocument {
    pub fn validate(&self) -> Result<(), RuleError> {
        let mut seen = std::collections::HashSet::new();
        for (i, rule) in self.rules.iter().enumerate() {
            let loc = format!("rule `{}`", rule.name);
            if rule.name.is_empty() {
                return Err(RuleError::schema(format!("rules[{i}]"), "rule name is empty"));
            }
            if !seen.insert(rule.name.as_str()) {
                return Err(RuleError::schema(&loc, "duplicate rule name"));
            }
            for cond in &rule.when.conditions {
                cond.validate(&loc)?;
            }
            for effect in &rule.effects {
                if let Some(gate) = effect.gate_ref() {
                    if !self.gates.contains_key(gate) {
                        return Err(RuleError::schema(
                            &loc,
                            format!("{} references undeclared gate `{gate}`", effect.type_name()),
                        ));
                    }
                }
                if let Some(x) = effect.amount() {
                    if !x.is_finite() {
                        return Err(RuleError::schema(&loc, format!("{} amount is not finite", effect.type_name())));
                    }
                }
                match effect {
                    Effect::AddCost { amount, .. }
                    | Effect::SanctionEvent { amount, .. }
                    | Effect::TransferBurden { amount, .. }
                        if *amount < 0.0 =>
                    {
                        return Err(RuleError::schema(
                            &loc,
                            format!("{} amount must be nonnegative", effect.type_name()),
                        ));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule document serializes")
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty() && self.rules.is_empty()
    }

    /// Rules that fire for `action` with `params`, in document order.
    pub fn match_rules(&self, action: ActionKind, params: &ParamMap) -> Vec<&Rule> {
        self.rules.iter().filter(|r| r.matches(action, params)).collect()
    }

    /// Parameters satisfying the first rule keyed on `action`: `eq` values and
    /// the first element of required `in` lists. Lets a policy emit a
    /// regime-appropriate FILE_PROCEEDING / REFERENCE_AUTHORITY without
    /// hardcoding the regime.
    pub fn exemplar_params(&self, action: ActionKind) -> Option<ParamMap> {
        let rule = self.rules.iter().find(|r| r.when.action == action)?;
        let mut params = ParamMap::new();
        for c in &rule.when.conditions {
            let v = match (c.op, c.optional) {
                (CondOp::Eq, _) => c.value.clone(),
                (CondOp::In, false) => c.value.as_array()?.first()?.clone(),
                (CondOp::Ge | CondOp::Le, false) => c.value.clone(),
                _ => continue,
            };
            params.insert(c.param.clone(), v);
        }
        Some(params)
    }

    /// Tokens blocked by the gates currently in force.
    pub fn blocked_set(&self, state: &CaseState) -> ActionSet {
        let mut set = ActionSet::empty();
        for g in &state.active_gates {
            if let Some(spec) = self.gates.get(&g.name) {
                for k in &spec.blocks_actions {
                    set.insert(*k);
                }
            }
        }
        set
    }

    /// True iff any active gate lists `action`.
    pub fn is_blocked(&self, state: &CaseState, action: ActionKind) -> bool {
        state.active_gates.iter().filter_map(|g| self.gates.get(&g.name)).any(|spec| spec.blocks(action))
    }
}

/// Which piece of state an effect touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Gate(String),
    Fees,
    Budget,
    Burden,
    DelayCredit,
    SanctionCount,
    SanctionPenalty,
    Citations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectLogEntry {
    pub rule: String,
    pub effect: String,
    pub target: Option<Role>,
    pub field: Field,
    pub delta: f64,
    /// True when the effect had nothing to act on.
    pub noop: bool,
}

pub type EffectLog = Vec<EffectLogEntry>;

/// Applies the effects of `rules` (already matched against the actor's token)
/// in rule order, then effect order. Returns one log entry per state change.
pub fn apply_effects(
    rules: &[&Rule],
    state: &mut CaseState,
    actor: Role,
    params: &ParamMap,
    rng: &mut dyn RngCore,
) -> EffectLog {
    let mut log = EffectLog::new();
    for rule in rules {
        for effect in &rule.effects {
            apply_one(&rule.name, effect, state, actor, params, rng, &mut log);
        }
    }
    log
}

fn apply_one(
    rule: &str,
    effect: &Effect,
    state: &mut CaseState,
    actor: Role,
    params: &ParamMap,
    rng: &mut dyn RngCore,
    log: &mut EffectLog,
) {
    let mut push = |target: Option<Role>, field: Field, delta: f64, noop: bool| {
        log.push(EffectLogEntry {
            rule: rule.to_string(),
            effect: effect.type_name().to_string(),
            target,
            field,
            delta,
            noop,
        })
    };
    match effect {
        Effect::SetGate { gate, duration } => match state.active_gates.iter_mut().find(|g| &g.name == gate) {
            Some(active) => {
                let before = active.remaining;
                active.remaining = before.max(*duration);
                let delta = f64::from(active.remaining - before);
                push(None, Field::Gate(gate.clone()), delta, delta == 0.0);
            }
            None if *duration > 0 => {
                state.active_gates.push(ActiveGate { name: gate.clone(), remaining: *duration });
                push(None, Field::Gate(gate.clone()), f64::from(*duration), false);
            }
            None => push(None, Field::Gate(gate.clone()), 0.0, true),
        },
        Effect::ExtendGate { gate, inc } => match state.active_gates.iter_mut().find(|g| &g.name == gate) {
            Some(active) => {
                active.remaining += inc;
                push(None, Field::Gate(gate.clone()), f64::from(*inc), *inc == 0);
            }
            None => push(None, Field::Gate(gate.clone()), 0.0, true),
        },
        Effect::AddCost { who, amount } => {
            let target = who.resolve(actor);
            let charged = state.party_mut(target).charge_fee(*amount);
            push(Some(target), Field::Fees, charged, charged == 0.0);
            push(Some(target), Field::Budget, -charged, charged == 0.0);
        }
        Effect::AddBurden { who, amount } => {
            let target = who.resolve(actor);
            let delta = state.party_mut(target).add_burden(*amount);
            push(Some(target), Field::Burden, delta, delta == 0.0);
        }
        Effect::TransferBurden { who, amount } => {
            let recipient = who.resolve(actor);
            let source = recipient.opponent();
            let moved = amount.min(state.party(source).burden);
            state.party_mut(source).add_burden(-moved);
            state.party_mut(recipient).add_burden(moved);
            push(Some(source), Field::Burden, -moved, moved == 0.0);
            push(Some(recipient), Field::Burden, moved, moved == 0.0);
        }
        Effect::AddDelayCredit { who, k } => {
            let target = who.resolve(actor);
            state.party_mut(target).delay_credit += k;
            push(Some(target), Field::DelayCredit, *k, *k == 0.0);
        }
        Effect::AddCitation { code_from_params } => match params.get(code_from_params) {
            Some(v) => {
                let code = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
                state.citations.push(code);
                push(Some(actor), Field::Citations, 1.0, false);
            }
            None => push(Some(actor), Field::Citations, 0.0, true),
        },
        Effect::SanctionEvent { who, amount } => {
            let target = who.resolve(actor);
            let fires = rng.gen::<f64>() < state.judge.sanction_tendency;
            if fires {
                let charged = state.party_mut(target).sanction(*amount);
                push(Some(target), Field::SanctionCount, 1.0, false);
                push(Some(target), Field::SanctionPenalty, charged, false);
                push(Some(target), Field::Budget, -charged, false);
            } else {
                push(Some(target), Field::SanctionCount, 0.0, true);
            }
        }
    }
}

/// Decrements every active gate by one step and removes (and returns) those
/// that reach zero.
pub fn tick_gates(state: &mut CaseState) -> Vec<String> {
    tick_gates_except(state, &[])
}

/// As [`tick_gates`], but leaves gates named in `fresh` untouched; used so a
/// gate set during a step starts counting down on the following step.
pub fn tick_gates_except(state: &mut CaseState, fresh: &[String]) -> Vec<String> {
    let mut expired = Vec::new();
    for g in state.active_gates.iter_mut() {
        if !fresh.contains(&g.name) {
            g.remaining = g.remaining.saturating_sub(1);
        }
        if g.remaining == 0 {
            expired.push(g.name.clone());
        }
    }
    state.active_gates.retain(|g| g.remaining > 0);
    expired
}
