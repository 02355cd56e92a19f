//! Per-policy summary tables built from league records.

use serde::Serialize;

use super::btl::BtlRatings;
use super::payoff::{judges_in, tally};
use super::EvalError;
use crate::harness::EpisodeRecord;
use crate::state::Role;

/// Mean, standard error of the mean and flag rate of a set of composites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositeStats {
    pub mean: f64,
    pub se: f64,
    pub flag_rate: f64,
    pub n: usize,
}

impl CompositeStats {
    pub fn of(values: &[f64], flag_threshold: f64) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        let flagged = values.iter().filter(|&&x| x >= flag_threshold).count();
        Some(CompositeStats { mean, se, flag_rate: flagged as f64 / n as f64, n })
    }
}

/// Composites `policy` earned in its own role, optionally restricted by judge
/// and role.
pub fn own_composites(records: &[EpisodeRecord], policy: &str, judge: Option<&str>, role: Option<Role>) -> Vec<f64> {
    records
        .iter()
        .filter(|r| judge.is_none_or(|j| r.spec.judge == j))
        .filter_map(|r| {
            let played = r.role_of(policy)?;
            role.is_none_or(|want| want == played).then(|| r.composite(played))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploitRow {
    pub policy: String,
    pub judge: String,
    pub mean_composite: f64,
    pub se_composite: f64,
    pub flag_rate: f64,
    pub n_episodes: usize,
}

/// One row per policy and judge (policies, then judges, in first-appearance
/// order). Combinations without games are omitted.
pub fn exploit_summary(records: &[EpisodeRecord], policies: &[String], flag_threshold: f64) -> Vec<ExploitRow> {
    let judges = judges_in(records);
    let mut rows = Vec::new();
    for p in policies {
        for j in &judges {
            let values = own_composites(records, p, Some(j), None);
            if let Some(st) = CompositeStats::of(&values, flag_threshold) {
                rows.push(ExploitRow {
                    policy: p.clone(),
                    judge: j.clone(),
                    mean_composite: st.mean,
                    se_composite: st.se,
                    flag_rate: st.flag_rate,
                    n_episodes: st.n,
                });
            }
        }
    }
    rows
}

/// Headline row per policy. BTL columns are on the display scale; the
/// `_natural` columns carry the fitted values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummaryRow {
    pub policy: String,
    pub win_rate_eff: f64,
    pub flag_rate: f64,
    pub mean_composite_plaintiff: f64,
    pub mean_composite_defendant: f64,
    pub btl: f64,
    pub btl_ci_low: f64,
    pub btl_ci_high: f64,
    pub btl_natural: f64,
    pub btl_ci_low_natural: f64,
    pub btl_ci_high_natural: f64,
    pub games: usize,
}

pub fn policy_summary(
    records: &[EpisodeRecord],
    ratings: &BtlRatings,
    flag_threshold: f64,
) -> Result<Vec<PolicySummaryRow>, EvalError> {
    let mut rows = Vec::new();
    for (k, p) in ratings.policies.iter().enumerate() {
        let t = tally(records, p);
        let win_rate_eff = t.effective_rate().ok_or_else(|| EvalError::NoGames(p.clone()))?;
        let all = own_composites(records, p, None, None);
        let stats = CompositeStats::of(&all, flag_threshold).ok_or_else(|| EvalError::NoGames(p.clone()))?;
        let role_mean = |role| {
            CompositeStats::of(&own_composites(records, p, None, Some(role)), flag_threshold)
                .map_or(f64::NAN, |s| s.mean)
        };
        let (btl, lo, hi) = ratings.display(k);
        let (nlo, nhi) = ratings.ci[k];
        rows.push(PolicySummaryRow {
            policy: p.clone(),
            win_rate_eff,
            flag_rate: stats.flag_rate,
            mean_composite_plaintiff: role_mean(Role::Plaintiff),
            mean_composite_defendant: role_mean(Role::Defendant),
            btl,
            btl_ci_low: lo,
            btl_ci_high: hi,
            btl_natural: ratings.ratings[k],
            btl_ci_low_natural: nlo,
            btl_ci_high_natural: nhi,
            games: t.games(),
        });
    }
    Ok(rows)
}

/// Effective win rate per policy, overall (`judge = "all"`) and per judge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinRateBar {
    pub policy: String,
    pub judge: String,
    pub win_rate_eff: f64,
    pub wins: usize,
    pub settlements: usize,
    pub losses: usize,
}

pub fn win_rate_bars(records: &[EpisodeRecord], policies: &[String]) -> Vec<WinRateBar> {
    let judges = judges_in(records);
    let mut rows = Vec::new();
    for p in policies {
        let scopes = std::iter::once(None).chain(judges.iter().map(|j| Some(j.as_str())));
        for scope in scopes {
            let t = tally(records.iter().filter(|r| scope.is_none_or(|j| r.spec.judge == j)), p);
            if let Some(rate) = t.effective_rate() {
                rows.push(WinRateBar {
                    policy: p.clone(),
                    judge: scope.unwrap_or("all").to_string(),
                    win_rate_eff: rate,
                    wins: t.wins,
                    settlements: t.settlements,
                    losses: t.losses,
                });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_composites_have_zero_se() {
        let s = CompositeStats::of(&[0.8; 5], 0.6).unwrap();
        assert_eq!((s.mean, s.se, s.flag_rate, s.n), (0.8, 0.0, 1.0, 5));
    }

    #[test]
    fn flag_rate_counts_boundary() {
        let s = CompositeStats::of(&[0.5, 0.7], 0.6).unwrap();
        assert_eq!(s.flag_rate, 0.5);
        assert_eq!(CompositeStats::of(&[0.6], 0.6).unwrap().flag_rate, 1.0);
        assert!(CompositeStats::of(&[], 0.6).is_none());
    }

    #[test]
    fn se_uses_sample_deviation() {
        // sd of {1,2,3,4} with n-1 is sqrt(5/3); se = sd / 2
        let s = CompositeStats::of(&[1.0, 2.0, 3.0, 4.0], 0.6).unwrap();
        assert!((s.se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
    }
}
