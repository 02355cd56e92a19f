//! Effective win rates and the role-symmetric cross-play matrices.

use serde::Serialize;

use super::EvalError;
use crate::harness::EpisodeRecord;
use crate::state::{OutcomeKind, Role};

/// Win/settlement/loss counts for one policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Tally {
    pub wins: usize,
    pub settlements: usize,
    pub losses: usize,
}

impl Tally {
    pub fn games(&self) -> usize {
        self.wins + self.settlements + self.losses
    }

    pub fn add_score(&mut self, score: f64) {
        if score == 1.0 {
            self.wins += 1;
        } else if score == 0.0 {
            self.losses += 1;
        } else {
            self.settlements += 1;
        }
    }

    /// Wins plus half the settlements, over all games.
    pub fn effective_rate(&self) -> Option<f64> {
        let n = self.games();
        (n > 0).then(|| (self.wins as f64 + 0.5 * self.settlements as f64) / n as f64)
    }
}

/// Tally of every game `policy` played, in either role.
pub fn tally<'a>(records: impl IntoIterator<Item = &'a EpisodeRecord>, policy: &str) -> Tally {
    let mut t = Tally::default();
    for r in records {
        if let Some(role) = r.role_of(policy) {
            t.add_score(r.outcome.score(role));
        }
    }
    t
}

pub fn effective_win_rate(records: &[EpisodeRecord], policy: &str) -> Result<f64, EvalError> {
    tally(records, policy).effective_rate().ok_or_else(|| EvalError::NoGames(policy.to_string()))
}

/// Policies in order of first appearance.
pub fn policies_in(records: &[EpisodeRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        for p in [&r.spec.policy_i, &r.spec.policy_j] {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
    }
    out
}

/// Judges in order of first appearance.
pub fn judges_in(records: &[EpisodeRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if !out.contains(&r.spec.judge) {
            out.push(r.spec.judge.clone());
        }
    }
    out
}

/// Row policy vs column policy. Diagonal cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffMatrix {
    pub policies: Vec<String>,
    /// Mean match score of the row policy, settlements as 0.5.
    pub win: Vec<Vec<Option<f64>>>,
    /// Mean of (plaintiff composite - defendant composite), negated for
    /// games where the row policy was the defendant.
    pub margin: Vec<Vec<Option<f64>>>,
    pub games: Vec<Vec<usize>>,
}

impl PayoffMatrix {
    pub fn index(&self, policy: &str) -> Option<usize> {
        self.policies.iter().position(|p| p == policy)
    }
}

/// Builds both matrices over `policies` (defaults to first-appearance
/// order). Games whose policies are not listed are ignored.
pub fn build_payoff(records: &[EpisodeRecord], policies: Option<&[String]>) -> Result<PayoffMatrix, EvalError> {
    let policies = policies.map(<[String]>::to_vec).unwrap_or_else(|| policies_in(records));
    let n = policies.len();
    if n < 2 {
        return Err(EvalError::TooFewPolicies);
    }
    let idx = |p: &str| policies.iter().position(|q| q == p);
    // Accumulated from the perspective of the lower index.
    let mut score = vec![vec![0.0; n]; n];
    let mut margin = vec![vec![0.0; n]; n];
    let mut games = vec![vec![0usize; n]; n];
    for r in records {
        let (Some(a), Some(b)) = (idx(&r.spec.policy_i), idx(&r.spec.policy_j)) else { continue };
        if a == b {
            continue;
        }
        let (lo, lo_role) = if a < b { (a, r.spec.i_role) } else { (b, r.spec.i_role.opponent()) };
        let hi = a.max(b);
        let sign = if lo_role == Role::Plaintiff { 1.0 } else { -1.0 };
        score[lo][hi] += r.outcome.score(lo_role);
        margin[lo][hi] += sign * (r.composite(Role::Plaintiff) - r.composite(Role::Defendant));
        games[lo][hi] += 1;
    }
    let mut m = PayoffMatrix {
        policies: policies.clone(),
        win: vec![vec![None; n]; n],
        margin: vec![vec![None; n]; n],
        games: vec![vec![0; n]; n],
    };
    for i in 0..n {
        for j in i + 1..n {
            let g = games[i][j];
            if g == 0 {
                return Err(EvalError::MissingPair(policies[i].clone(), policies[j].clone()));
            }
            let w = score[i][j] / g as f64;
            let c = margin[i][j] / g as f64;
            m.win[i][j] = Some(w);
            m.win[j][i] = Some(1.0 - w);
            m.margin[i][j] = Some(c);
            m.margin[j][i] = Some(-c);
            m.games[i][j] = g;
            m.games[j][i] = g;
        }
    }
    Ok(m)
}

/// Share of games ending in each outcome kind, in `OutcomeKind` order.
pub fn outcome_mix(records: &[EpisodeRecord]) -> [(OutcomeKind, usize); 4] {
    let kinds =
        [OutcomeKind::PlaintiffWin, OutcomeKind::DefendantWin, OutcomeKind::Settlement, OutcomeKind::MaxStepsJudgment];
    kinds.map(|k| (k, records.iter().filter(|r| r.outcome.kind == k).count()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_rates() {
        let t = Tally { wins: 3, settlements: 2, losses: 5 };
        assert!((t.effective_rate().unwrap() - 0.4).abs() < 1e-12);
        let s = Tally { wins: 0, settlements: 7, losses: 0 };
        assert_eq!(s.effective_rate(), Some(0.5));
        assert_eq!(Tally::default().effective_rate(), None);
    }

    #[test]
    fn add_score_classifies() {
        let mut t = Tally::default();
        for s in [1.0, 0.5, 0.0, 1.0] {
            t.add_score(s);
        }
        assert_eq!(t, Tally { wins: 2, settlements: 1, losses: 1 });
    }
}
