//! Single-episode runner and the episode record.

use serde::{Deserialize, Serialize};

use crate::env::{Env, EnvError, StepReport};
use crate::metrics::{exploit_components, ExploitComponents};
use crate::policies::{EpisodeFeedback, Policy, PolicyContext};
use crate::rng::stream;
use crate::rules::ActiveGate;
use crate::state::{JudgeProfile, Outcome, PartyState, Role};
use crate::token::ActionToken;

/// One game between two policies with a fixed role assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchSpec {
    pub policy_i: String,
    pub policy_j: String,
    pub judge: String,
    pub seed: u64,
    /// Role played by `policy_i`.
    pub i_role: Role,
    pub regime: String,
}

impl MatchSpec {
    pub fn policy_for(&self, role: Role) -> &str {
        if role == self.i_role {
            &self.policy_i
        } else {
            &self.policy_j
        }
    }

    pub fn plaintiff(&self) -> &str {
        self.policy_for(Role::Plaintiff)
    }

    pub fn defendant(&self) -> &str {
        self.policy_for(Role::Defendant)
    }
}

/// Seeds for the independent random streams of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeSeeds {
    /// Merits draw.
    pub case: u64,
    /// Judge and rule draws.
    pub env: u64,
    pub plaintiff: u64,
    pub defendant: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    #[serde(flatten)]
    pub report: StepReport,
    /// Gates active after the step.
    pub active_gates: Vec<ActiveGate>,
}

/// Final per-party figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartySummary {
    pub budget: f64,
    pub fees: f64,
    pub burden: f64,
    pub sanction_count: u32,
    pub sanction_penalty: f64,
    pub merits: f64,
    pub delay_credit: f64,
    pub settlement_offers: Vec<f64>,
    pub components: ExploitComponents,
    pub violations: u32,
}

impl PartySummary {
    fn new(p: &PartyState, components: ExploitComponents, violations: u32) -> Self {
        PartySummary {
            budget: p.budget,
            fees: p.fees,
            burden: p.burden,
            sanction_count: p.sanction_count,
            sanction_penalty: p.sanction_penalty,
            merits: p.merits,
            delay_credit: p.delay_credit,
            settlement_offers: p.settlement_offers_made.clone(),
            components,
            violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub spec: MatchSpec,
    pub judge_profile: JudgeProfile,
    pub seeds: EpisodeSeeds,
    pub config_hash: String,
    pub steps: Vec<StepEntry>,
    pub outcome: Outcome,
    pub plaintiff: PartySummary,
    pub defendant: PartySummary,
    /// Contract violations, in order, prefixed with the offending role.
    pub violation_log: Vec<String>,
}

impl EpisodeRecord {
    pub fn party(&self, role: Role) -> &PartySummary {
        match role {
            Role::Plaintiff => &self.plaintiff,
            Role::Defendant => &self.defendant,
        }
    }

    /// Role played by `policy` in this game, if it played.
    pub fn role_of(&self, policy: &str) -> Option<Role> {
        Role::BOTH.into_iter().find(|r| self.spec.policy_for(*r) == policy)
    }

    /// Match score of `policy_i`: 1 win, 0.5 settlement, 0 loss.
    pub fn score_i(&self) -> f64 {
        self.outcome.score(self.spec.i_role)
    }

    pub fn composite(&self, role: Role) -> f64 {
        self.party(role).components.composite
    }

    pub fn tokens_of(&self, role: Role) -> Vec<&ActionToken> {
        self.steps.iter().filter(|s| s.report.actor == role).map(|s| &s.report.token).collect()
    }
}

/// Runs one episode to termination, plaintiff first, alternating strictly.
/// Tokens that are illegal or carry invalid params are replaced by NOOP and
/// logged as violations.
pub fn run_episode(
    env: &Env,
    spec: &MatchSpec,
    judge: JudgeProfile,
    seeds: EpisodeSeeds,
    plaintiff: &mut dyn Policy,
    defendant: &mut dyn Policy,
) -> EpisodeRecord {
    let cfg = env.config();
    let mut state = env.reset(judge, seeds.case);
    let mut env_rng = stream(seeds.env);
    let mut rngs = [stream(seeds.plaintiff), stream(seeds.defendant)];
    let mut own_turns = [0u32; 2];
    let mut violations = [0u32; 2];
    let mut violation_log = Vec::new();
    let mut steps = Vec::new();
    plaintiff.begin_episode(Role::Plaintiff);
    defendant.begin_episode(Role::Defendant);

    let mut role = Role::Plaintiff;
    while !state.is_terminated() {
        let slot = role as usize;
        let legal = env.legal_actions(&state, role).expect("episode not terminated");
        let me = state.party(role);
        let mut ctx = PolicyContext {
            observation: env.observe(&state, role),
            legal,
            role,
            rng: &mut rngs[slot],
            t: state.t,
            own_turn: own_turns[slot],
            pending_request: me.pending_request.is_some(),
            pending_motion: me.pending_motion,
            initial_budget: cfg.initial_budget,
            rules: env.rules(),
            violations: Vec::new(),
        };
        let policy: &mut dyn Policy = if role == Role::Plaintiff { &mut *plaintiff } else { &mut *defendant };
        let token = policy.act(&mut ctx);
        let mut noted = std::mem::take(&mut ctx.violations);

        let report = match env.step(&mut state, role, &token, &mut env_rng) {
            Ok(r) => r,
            Err(e @ (EnvError::Blocked(..) | EnvError::InvalidParams(..))) => {
                let reason = e.to_string();
                noted.push(format!("substituted NOOP: {reason}"));
                let mut r =
                    env.step(&mut state, role, &ActionToken::noop(), &mut env_rng).expect("NOOP is always legal");
                r.ruling.substituted = Some(reason);
                if let Some(h) = state.history.last_mut() {
                    h.ruling.substituted = r.ruling.substituted.clone();
                }
                r
            }
            Err(e) => panic!("environment refused a step mid-episode: {e}"),
        };
        violations[slot] += noted.len() as u32;
        violation_log.extend(noted.into_iter().map(|v| format!("{role}@{}: {v}", report.t)));
        plaintiff.observe(&report, cfg);
        defendant.observe(&report, cfg);
        steps.push(StepEntry { report, active_gates: state.active_gates.clone() });
        own_turns[slot] += 1;
        role = role.opponent();
    }

    let outcome = state.terminated.clone().expect("loop exits on termination");
    let comp = |r: Role| exploit_components(&state, r, cfg.initial_budget, &cfg.exploit);
    let (pc, dc) = (comp(Role::Plaintiff), comp(Role::Defendant));
    plaintiff.end_episode(&EpisodeFeedback { role: Role::Plaintiff, outcome: &outcome, own: pc, opponent: dc });
    defendant.end_episode(&EpisodeFeedback { role: Role::Defendant, outcome: &outcome, own: dc, opponent: pc });

    EpisodeRecord {
        spec: spec.clone(),
        judge_profile: judge,
        seeds,
        config_hash: cfg.content_hash(),
        steps,
        outcome,
        plaintiff: PartySummary::new(&state.plaintiff, pc, violations[0]),
        defendant: PartySummary::new(&state.defendant, dc, violations[1]),
        violation_log,
    }
}
