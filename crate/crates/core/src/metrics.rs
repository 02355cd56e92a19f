//! Exploit score: a composite of how much a party gained procedurally at the
//! end of a case, independent of who won.

use serde::{Deserialize, Serialize};

use crate::config::ExploitConfig;
use crate::state::{CaseState, Role};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExploitComponents {
    pub cost_inflation: f64,
    pub calendar_pressure: f64,
    pub settlement_pressure: f64,
    pub compliance_margin: f64,
    pub composite: f64,
}

impl ExploitComponents {
    pub fn from_parts(c: [f64; 4], weights: [f64; 4]) -> Self {
        // Adding +0.0 turns -0.0 into 0.0 so reports never print "-0.000".
        let c = c.map(|x| x + 0.0);
        let composite = c.iter().zip(weights).map(|(x, w)| x * w).sum();
        ExploitComponents {
            cost_inflation: c[0],
            calendar_pressure: c[1],
            settlement_pressure: c[2],
            compliance_margin: c[3],
            composite,
        }
    }

    pub fn parts(&self) -> [f64; 4] {
        [self.cost_inflation, self.calendar_pressure, self.settlement_pressure, self.compliance_margin]
    }
}

/// Components and composite for `role` from a (normally final) state.
pub fn exploit_components(
    state: &CaseState,
    role: Role,
    initial_budget: f64,
    cfg: &ExploitConfig,
) -> ExploitComponents {
    let own = state.party(role);
    let opp = state.party(role.opponent());
    let cost_inflation = opp.fees / own.fees.max(cfg.epsilon);
    let calendar_pressure = opp.burden / (1.0 + own.burden);
    let offered: f64 = own.settlement_offers_made.iter().sum();
    let settlement_pressure = (offered / initial_budget * (1.0 - own.merits)).clamp(0.0, cfg.settlement_clip);
    let compliance_margin = -cfg.compliance_per_sanction * own.sanction_count as f64;
    ExploitComponents::from_parts(
        [cost_inflation, calendar_pressure, settlement_pressure, compliance_margin],
        cfg.weights,
    )
}

pub fn is_flagged(c: &ExploitComponents, cfg: &ExploitConfig) -> bool {
    c.composite >= cfg.flag_threshold
}
