//! Text-generator policy: renders a JSON-constrained prompt, parses the reply
//! strictly and falls back to NOOP on any contract violation.

use std::fmt::Write as _;
use std::time::Duration;

use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use super::{Policy, PolicyContext};
use crate::rng::{stream, StreamRng};
use crate::state::Role;
use crate::token::{ActionKind, ActionToken, ParamMap};

pub const SYSTEM_JSON: &str = "You are an adversarial litigation strategy assistant. Return ONLY valid JSON.";

const FEW_SHOT: &str = r#"Examples of good and bad moves (abstract tokens):
OBS:[...], TACTIC:SEEK_DISMISSAL -> GOOD: {"action":{"type":"FILE_MOTION","params":{"aggr":0.3}}}
OBS:[...], TACTIC:DELAY -> GOOD: {"action":{"type":"FILE_PROCEEDING","params":{"proceeding_type":"bankruptcy","chapter":11,"forum":"BK"}}}
OBS:[...], TACTIC:TAX_STAY -> GOOD: {"action":{"type":"REFERENCE_AUTHORITY","params":{"code":"26 USC 6331","weight":0.7}}}

Return ONLY a JSON object with keys:
- reasoning: string
- action: {type: one of ACTION_TOKENS, params: {...}}"#;

/// Free-text prompt variant; kept as a template only.
pub const SYSTEM_FREE_TEXT: &str = "You are an adversarial litigation strategy assistant. Respond concisely.";
pub const USER_FREE_TEXT: &str = "Given the legal discovery game, propose ONE next action for the indicated role.
Include the action token name from: NOOP, REQUEST_DOCS, ..., REFERENCE_AUTHORITY.
Optionally include params like custodians=10, complexity=0.7, aggr=0.4, amount=25.";

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRequest {
    pub role: Role,
    pub tactic_hint: Option<String>,
    pub observation: Vec<f64>,
}

impl GeneratorRequest {
    pub fn render_user(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ROLE: {}", self.role);
        let _ = writeln!(s, "TACTIC_HINT: {}", self.tactic_hint.as_deref().unwrap_or(""));
        let obs: Vec<String> = self.observation.iter().map(|x| format!("{x:.3}")).collect();
        let _ = writeln!(s, "OBS: [{}]", obs.join(", "));
        s.push('\n');
        s.push_str(FEW_SHOT);
        s
    }
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("transport: {0}")]
    Transport(String),
}

pub trait TextGenerator: Send {
    /// Returns the raw reply text for a rendered prompt.
    fn complete(&mut self, system: &str, user: &str, request: &GeneratorRequest) -> Result<String, GeneratorError>;
}

#[derive(Debug, Error, PartialEq)]
pub enum ContractError {
    #[error("reply is not a single JSON object: {0}")]
    NotJson(String),
    #[error("reply is missing `{0}`")]
    Missing(&'static str),
    #[error("`{0}` has the wrong type")]
    WrongType(&'static str),
    #[error("unknown action token `{0}`")]
    UnknownToken(String),
    #[error("bad params: {0}")]
    Params(String),
}

/// Strict reply parse: exactly one JSON object with `reasoning` (string) and
/// `action` ({type, params}); other keys are ignored.
pub fn parse_reply(text: &str) -> Result<ActionToken, ContractError> {
    let value: Value = serde_json::from_str(text.trim()).map_err(|e| ContractError::NotJson(e.to_string()))?;
    let obj = value.as_object().ok_or(ContractError::NotJson("top level is not an object".into()))?;
    match obj.get("reasoning") {
        None => return Err(ContractError::Missing("reasoning")),
        Some(Value::String(_)) => {}
        Some(_) => return Err(ContractError::WrongType("reasoning")),
    }
    let action = obj.get("action").ok_or(ContractError::Missing("action"))?;
    let action = action.as_object().ok_or(ContractError::WrongType("action"))?;
    let kind = action.get("type").ok_or(ContractError::Missing("action.type"))?;
    let kind = kind.as_str().ok_or(ContractError::WrongType("action.type"))?;
    let kind: ActionKind = kind.parse().map_err(|_| ContractError::UnknownToken(kind.to_string()))?;
    let params: ParamMap = match action.get("params") {
        None | Some(Value::Null) => ParamMap::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(ContractError::WrongType("action.params")),
    };
    let token = ActionToken { kind, params };
    token.validate_params().map_err(|e| ContractError::Params(e.to_string()))?;
    Ok(token)
}

/// Prompts the generator (one retry on a bad reply or transport error) and
/// returns a legal token, or NOOP with a recorded violation.
pub fn generate_token(gen: &mut dyn TextGenerator, ctx: &mut PolicyContext<'_>, hint: Option<&str>) -> ActionToken {
    let request = GeneratorRequest {
        role: ctx.role,
        tactic_hint: hint.map(str::to_string),
        observation: ctx.observation.as_slice().to_vec(),
    };
    let user = request.render_user();
    let mut last_error = String::new();
    for _ in 0..2 {
        match gen.complete(SYSTEM_JSON, &user, &request) {
            Ok(text) => match parse_reply(&text) {
                Ok(token) => return ctx.legal_or_noop(token, "generator"),
                Err(e) => last_error = e.to_string(),
            },
            Err(e) => last_error = e.to_string(),
        }
    }
    ctx.violations.push(format!("generator: {last_error}"));
    ActionToken::noop()
}

/// Offline stand-in for a hosted model. Answers tactic hints with the
/// few-shot examples and otherwise picks a move from the observation.
pub struct ScriptedGenerator {
    rng: StreamRng,
}

impl ScriptedGenerator {
    pub fn new(seed: u64) -> Self {
        ScriptedGenerator { rng: stream(seed) }
    }

    fn tactic_for(&mut self, obs: &[f64]) -> &'static str {
        let (own_budget, own_burden) = (obs[0], obs[2]);
        if own_burden > 0.5 {
            "CONSERVE"
        } else if own_budget < 0.3 {
            "PRESS_SETTLEMENT"
        } else {
            let u: f64 = self.rng.gen();
            if u < 0.5 {
                "BURDEN_OPP"
            } else if u < 0.8 {
                "SEEK_DISMISSAL"
            } else {
                "DELAY"
            }
        }
    }

    pub fn reply_for(&mut self, request: &GeneratorRequest) -> String {
        let tactic = match request.tactic_hint.as_deref() {
            Some(h) if !h.is_empty() => h.to_string(),
            _ => self.tactic_for(&request.observation).to_string(),
        };
        let own_merits = request.observation[9];
        let action = match tactic.as_str() {
            "SEEK_DISMISSAL" => json!({"type": "FILE_MOTION", "params": {"aggr": 0.3}}),
            "DELAY" => json!({"type": "FILE_PROCEEDING",
                "params": {"proceeding_type": "bankruptcy", "chapter": 11, "forum": "BK"}}),
            "TAX_STAY" => json!({"type": "REFERENCE_AUTHORITY", "params": {"code": "26 USC 6331", "weight": 0.7}}),
            "BURDEN_OPP" => json!({"type": "REQUEST_DOCS", "params": {"custodians": 10, "complexity": 0.6}}),
            "PRESS_SETTLEMENT" => {
                let amount = (50.0 * (1.0 - own_merits) * 100.0).round() / 100.0;
                json!({"type": "SETTLEMENT_OFFER", "params": {"amount": amount}})
            }
            "CONSERVE" => json!({"type": "MEET_CONFER"}),
            _ => json!({"type": "NOOP"}),
        };
        json!({"reasoning": format!("tactic {tactic}"), "action": action}).to_string()
    }
}

impl TextGenerator for ScriptedGenerator {
    fn complete(&mut self, _system: &str, _user: &str, request: &GeneratorRequest) -> Result<String, GeneratorError> {
        Ok(self.reply_for(request))
    }
}

/// Remote endpoint: POSTs `{"system": ..., "user": ...}` and takes the
/// response body as the reply text.
pub struct HttpGenerator {
    url: String,
    token: Option<String>,
    agent: ureq::Agent,
}

pub const URL_ENV: &str = "LEGALSIM_GENERATOR_URL";
pub const TOKEN_ENV: &str = "LEGALSIM_GENERATOR_TOKEN";

impl HttpGenerator {
    pub fn new(url: impl Into<String>, token: Option<String>) -> Self {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(Duration::from_secs(60))).build().into();
        HttpGenerator { url: url.into(), token, agent }
    }

    /// Configured from the environment; `None` when no endpoint is set.
    pub fn from_env() -> Option<Self> {
        let url = std::env::var(URL_ENV).ok().filter(|u| !u.is_empty())?;
        Some(HttpGenerator::new(url, std::env::var(TOKEN_ENV).ok()))
    }
}

impl TextGenerator for HttpGenerator {
    fn complete(&mut self, system: &str, user: &str, _request: &GeneratorRequest) -> Result<String, GeneratorError> {
        let body = json!({"system": system, "user": user}).to_string();
        let mut req = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(t) = &self.token {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = req.send(body).map_err(|e| GeneratorError::Transport(e.to_string()))?;
        resp.body_mut().read_to_string().map_err(|e| GeneratorError::Transport(e.to_string()))
    }
}

/// Direct generator policy: every move is proposed by the generator.
pub struct GeneratorPolicy {
    id: String,
    generator: Box<dyn TextGenerator>,
}

impl GeneratorPolicy {
    pub fn new(generator: Box<dyn TextGenerator>) -> Self {
        GeneratorPolicy { id: "llm".into(), generator }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

impl Policy for GeneratorPolicy {
    fn id(&self) -> &str {
        &self.id
    }

    fn act(&mut self, ctx: &mut PolicyContext<'_>) -> ActionToken {
        generate_token(self.generator.as_mut(), ctx, None)
    }
}
