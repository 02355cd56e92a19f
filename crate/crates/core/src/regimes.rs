//! Built-in procedural regimes shipped with the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rules::{load_rules, RuleDocument, RuleError};

pub const BANKRUPTCY: &str = include_str!("../regimes/bankruptcy.json");
pub const PATENT: &str = include_str!("../regimes/patent.json");
pub const TAX: &str = include_str!("../regimes/tax.json");
pub const IMMIGRATION: &str = include_str!("../regimes/immigration.json");
pub const CORPORATE: &str = include_str!("../regimes/corporate.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[default]
    Bankruptcy,
    Patent,
    Tax,
    Immigration,
    Corporate,
}

impl Regime {
    pub const ALL: [Regime; 5] =
        [Regime::Bankruptcy, Regime::Patent, Regime::Tax, Regime::Immigration, Regime::Corporate];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Bankruptcy => "bankruptcy",
            Regime::Patent => "patent",
            Regime::Tax => "tax",
            Regime::Immigration => "immigration",
            Regime::Corporate => "corporate",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Regime::Bankruptcy => BANKRUPTCY,
            Regime::Patent => PATENT,
            Regime::Tax => TAX,
            Regime::Immigration => IMMIGRATION,
            Regime::Corporate => CORPORATE,
        }
    }

    pub fn load(self) -> Result<RuleDocument, RuleError> {
        load_rules(self.source())
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(Regime::Bankruptcy),
            _ => Regime::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| format!("unknown regime `{s}`")),
        }
    }
}
