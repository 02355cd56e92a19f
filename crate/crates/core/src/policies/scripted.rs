//! Plays a fixed token list in order, then NOOP.

use super::{Policy, PolicyContext};
use crate::token::ActionToken;

#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    id: String,
    tokens: Vec<ActionToken>,
    next: usize,
}

impl ScriptedPolicy {
    pub fn new(id: impl Into<String>, tokens: Vec<ActionToken>) -> Self {
        ScriptedPolicy { id: id.into(), tokens, next: 0 }
    }
}

impl Policy for ScriptedPolicy {
    fn id(&self) -> &str {
        &self.id
    }

    fn begin_episode(&mut self, _role: crate::state::Role) {
        self.next = 0;
    }

    fn act(&mut self, ctx: &mut PolicyContext<'_>) -> ActionToken {
        match self.tokens.get(self.next) {
            Some(token) => {
                self.next += 1;
                ctx.legal_or_noop(token.clone(), "script")
            }
            None => ActionToken::noop(),
        }
    }
}
