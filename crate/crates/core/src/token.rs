//! Procedural action tokens and their parameter maps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Free-form token parameters. Key order is preserved so traces print the
/// way they were written.
pub type ParamMap = Map<String, Value>;

/// The thirteen procedural moves available to either party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ActionKind {
    Noop,
    RequestDocs,
    ObjectRequest,
    FileMotion,
    RespondMotion,
    MoveCompel,
    MoveSanctions,
    MeetConfer,
    SettlementOffer,
    ChangeVenue,
    Withdraw,
    FileProceeding,
    ReferenceAuthority,
}

impl ActionKind {
    pub const COUNT: usize = 13;

    /// Vocabulary in canonical order; the index doubles as the policy action index.
    pub const ALL: [ActionKind; 13] = [
        ActionKind::Noop,
        ActionKind::RequestDocs,
        ActionKind::ObjectRequest,
        ActionKind::FileMotion,
        ActionKind::RespondMotion,
        ActionKind::MoveCompel,
        ActionKind::MoveSanctions,
        ActionKind::MeetConfer,
        ActionKind::SettlementOffer,
        ActionKind::ChangeVenue,
        ActionKind::Withdraw,
        ActionKind::FileProceeding,
        ActionKind::ReferenceAuthority,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<ActionKind> {
        Self::ALL.get(idx).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Noop => "NOOP",
            ActionKind::RequestDocs => "REQUEST_DOCS",
            ActionKind::ObjectRequest => "OBJECT_REQUEST",
            ActionKind::FileMotion => "FILE_MOTION",
            ActionKind::RespondMotion => "RESPOND_MOTION",
            ActionKind::MoveCompel => "MOVE_COMPEL",
            ActionKind::MoveSanctions => "MOVE_SANCTIONS",
            ActionKind::MeetConfer => "MEET_CONFER",
            ActionKind::SettlementOffer => "SETTLEMENT_OFFER",
            ActionKind::ChangeVenue => "CHANGE_VENUE",
            ActionKind::Withdraw => "WITHDRAW",
            ActionKind::FileProceeding => "FILE_PROCEEDING",
            ActionKind::ReferenceAuthority => "REFERENCE_AUTHORITY",
        }
    }

    /// Tokens that go before the judge and count toward sanction risk.
    pub fn is_aggressive(self) -> bool {
        matches!(self, ActionKind::FileMotion | ActionKind::MoveCompel | ActionKind::MoveSanctions)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown action token `{0}`")]
pub struct UnknownToken(pub String);

impl FromStr for ActionKind {
    type Err = UnknownToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionKind::ALL.iter().copied().find(|k| k.as_str() == s).ok_or_else(|| UnknownToken(s.to_string()))
    }
}

/// A set of action kinds, stored as a 13-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ActionSet(u16);

impl ActionSet {
    pub fn empty() -> Self {
        ActionSet(0)
    }

    pub fn all() -> Self {
        ActionSet((1 << ActionKind::COUNT) - 1)
    }

    pub fn insert(&mut self, kind: ActionKind) {
        self.0 |= 1 << kind.index();
    }

    pub fn remove(&mut self, kind: ActionKind) {
        self.0 &= !(1 << kind.index());
    }

    pub fn contains(&self, kind: ActionKind) -> bool {
        self.0 & (1 << kind.index()) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = ActionKind> + '_ {
        ActionKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }

    /// Boolean mask in vocabulary order.
    pub fn mask(&self) -> [bool; ActionKind::COUNT] {
        let mut m = [false; ActionKind::COUNT];
        for k in self.iter() {
            m[k.index()] = true;
        }
        m
    }
}

impl FromIterator<ActionKind> for ActionSet {
    fn from_iter<I: IntoIterator<Item = ActionKind>>(iter: I) -> Self {
        let mut s = ActionSet::empty();
        for k in iter {
            s.insert(k);
        }
        s
    }
}

/// One emitted move: a token type plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionToken {
    #[serde(rename = "type")]
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: ParamMap,
}

impl ActionToken {
    pub fn new(kind: ActionKind) -> Self {
        ActionToken { kind, params: ParamMap::new() }
    }

    pub fn noop() -> Self {
        Self::new(ActionKind::Noop)
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(Value::as_f64)
    }

    pub fn num_or(&self, key: &str, default: f64) -> f64 {
        self.num(key).unwrap_or(default)
    }

    /// Checks the typed parameters the environment reads.
    pub fn validate_params(&self) -> Result<(), ParamError> {
        for (key, value) in &self.params {
            match key.as_str() {
                "custodians" => match value.as_f64() {
                    Some(n) if n >= 0.0 && n.fract() == 0.0 => {}
                    _ => return Err(ParamError::new(key, "nonnegative integer")),
                },
                "complexity" | "aggr" | "importance" | "weight" => match value.as_f64() {
                    Some(x) if (0.0..=1.0).contains(&x) => {}
                    _ => return Err(ParamError::new(key, "number in [0, 1]")),
                },
                "amount" => match value.as_f64() {
                    Some(x) if x.is_finite() && x >= 0.0 => {}
                    _ => return Err(ParamError::new(key, "finite nonnegative amount")),
                },
                _ => {}
            }
        }
        Ok(())
    }
}

impl fmt::Display for ActionToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serde_json::to_string(self) {
            Ok(s) => f.write_str(&s),
            Err(_) => f.write_str(self.kind.as_str()),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("param `{key}` must be a {expected}")]
pub struct ParamError {
    pub key: String,
    pub expected: &'static str,
}

impl ParamError {
    fn new(key: &str, expected: &'static str) -> Self {
        ParamError { key: key.to_string(), expected }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_is_thirteen_tokens_in_order() {
        let names: Vec<_> = ActionKind::ALL.iter().map(|k| k.as_str()).collect();
        assert_eq!(
            names.join(", "),
            "NOOP, REQUEST_DOCS, OBJECT_REQUEST, FILE_MOTION, RESPOND_MOTION, MOVE_COMPEL, \
             MOVE_SANCTIONS, MEET_CONFER, SETTLEMENT_OFFER, CHANGE_VENUE, WITHDRAW, \
             FILE_PROCEEDING, REFERENCE_AUTHORITY"
        );
        for (i, k) in ActionKind::ALL.iter().enumerate() {
            assert_eq!(k.index(), i);
            assert_eq!(ActionKind::from_index(i), Some(*k));
            assert_eq!(k.as_str().parse::<ActionKind>().unwrap(), *k);
        }
        assert!("APPEAL".parse::<ActionKind>().is_err());
    }

    #[test]
    fn serde_uses_wire_names() {
        let t: ActionToken =
            serde_json::from_str(r#"{"type":"REQUEST_DOCS","params":{"custodians":10,"complexity":0.6}}"#).unwrap();
        assert_eq!(t.kind, ActionKind::RequestDocs);
        assert_eq!(t.num("custodians"), Some(10.0));
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"type":"REQUEST_DOCS","params":{"custodians":10,"complexity":0.6}}"#
        );
        let bare: ActionToken = serde_json::from_str(r#"{"type":"MEET_CONFER"}"#).unwrap();
        assert_eq!(serde_json::to_string(&bare).unwrap(), r#"{"type":"MEET_CONFER"}"#);
    }

    #[test]
    fn action_set_ops() {
        let mut s = ActionSet::all();
        assert_eq!(s.len(), 13);
        s.remove(ActionKind::FileMotion);
        assert!(!s.contains(ActionKind::FileMotion));
        assert_eq!(s.len(), 12);
        assert!(!s.mask()[ActionKind::FileMotion.index()]);
        assert!(ActionSet::empty().is_empty());
    }

    #[test]
    fn param_validation() {
        assert!(ActionToken::new(ActionKind::RequestDocs)
            .with("custodians", 3)
            .with("complexity", 0.2)
            .validate_params()
            .is_ok());
        assert!(ActionToken::new(ActionKind::RequestDocs).with("custodians", 2.5).validate_params().is_err());
        assert!(ActionToken::new(ActionKind::FileMotion).with("aggr", 1.5).validate_params().is_err());
        assert!(ActionToken::new(ActionKind::SettlementOffer).with("amount", -1.0).validate_params().is_err());
        // Unknown keys are carried through untouched.
        assert!(ActionToken::new(ActionKind::FileMotion).with("kind", "protective").validate_params().is_ok());
    }
}
