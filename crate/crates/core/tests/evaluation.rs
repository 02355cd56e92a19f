mod support;

use std::sync::Arc;

use proptest::prelude::*;

use legalsim::evaluation::{
    btl_fit, build_payoff, exploit_summary, policy_summary, rate_league, run_point, tally, EvalError, Game, SweepAxis,
    SweepConfig,
};
use legalsim::harness::{EpisodeRecord, LeagueConfig, PolicyKind, PolicyPool};
use legalsim::{EnvConfig, Regime, Role};

use support::{synthetic_league, synthetic_record, template_record};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Eight games between a and b (plus two a-c games so c is present).
fn hand_records() -> Vec<EpisodeRecord> {
    let t = template_record();
    let rec = |i: &str, j: &str, role, s, c| synthetic_record(&t, i, j, "strict", role, s, c);
    vec![
        rec("a", "b", Role::Plaintiff, 1.0, (0.9, 0.1)),
        rec("a", "b", Role::Defendant, 1.0, (0.2, 0.6)),
        rec("a", "b", Role::Plaintiff, 0.5, (0.4, 0.4)),
        rec("a", "b", Role::Defendant, 0.0, (1.0, 0.0)),
        rec("b", "a", Role::Plaintiff, 0.0, (0.3, 0.5)),
        rec("b", "a", Role::Defendant, 0.5, (0.0, 0.8)),
        rec("a", "c", Role::Plaintiff, 1.0, (0.5, 0.5)),
        rec("c", "a", Role::Plaintiff, 1.0, (0.7, 0.1)),
    ]
}

#[test]
fn payoff_matches_hand_tally() {
    let recs = hand_records();
    assert!(matches!(build_payoff(&recs, None), Err(EvalError::MissingPair(b, c)) if b == "b" && c == "c"));
    let m = build_payoff(&recs, Some(&names(&["a", "b"]))).unwrap();
    // a vs b, a's scores: 1, 1, .5, 0, 1, .5
    let w_ab = (1.0 + 1.0 + 0.5 + 0.0 + 1.0 + 0.5) / 6.0;
    // a's composite minus b's: .8, .4, 0, -1, .2, -.8
    let c_ab = (0.8 + 0.4 + 0.0 - 1.0 + 0.2 - 0.8) / 6.0;
    assert!((m.win[0][1].unwrap() - w_ab).abs() < 1e-12);
    assert!((m.margin[0][1].unwrap() - c_ab).abs() < 1e-12);
    assert_eq!(m.games[1][0], 6);
    assert_eq!((m.win[0][0], m.margin[1][1]), (None, None));
    assert_eq!(m.win[0][1].unwrap() + m.win[1][0].unwrap(), 1.0);
    assert_eq!(m.margin[0][1].unwrap(), -m.margin[1][0].unwrap());
    let ac = build_payoff(&recs, Some(&names(&["a", "c"]))).unwrap();
    assert!((ac.win[0][1].unwrap() - 0.5).abs() < 1e-12);
    assert!((ac.margin[1][0].unwrap() - 0.6 / 2.0).abs() < 1e-12);
    let t = tally(&recs, "a");
    assert_eq!((t.wins, t.settlements, t.losses), (4, 2, 2));
}

/// Pairwise match-score totals of the row policy out of 40 games per pair,
/// chosen so the effective rates come out at 89, 68.5, 52 and 30.5 of 120.
const TOTALS: [(usize, usize, f64); 6] =
    [(0, 1, 26.0), (0, 2, 30.0), (0, 3, 33.0), (1, 2, 24.5), (1, 3, 30.0), (2, 3, 26.5)];

fn tallied_league() -> Vec<EpisodeRecord> {
    let t = template_record();
    let p = names(&["ppo", "bandit", "llm", "heuristic"]);
    let mut out = Vec::new();
    for (i, j, total) in TOTALS {
        let wins = total.floor() as usize;
        let settle = usize::from(total.fract() > 0.0);
        for g in 0..40 {
            let s = if g < wins {
                1.0
            } else if g < wins + settle {
                0.5
            } else {
                0.0
            };
            let role = if g % 2 == 0 { Role::Plaintiff } else { Role::Defendant };
            let judge = if g % 4 < 2 { "permissive" } else { "strict" };
            out.push(synthetic_record(&t, &p[i], &p[j], judge, role, s, (0.7, 0.7)));
        }
    }
    out
}

#[test]
fn effective_win_rates_to_three_decimals() {
    let recs = tallied_league();
    assert_eq!(recs.len(), 240);
    let policies = names(&["ppo", "bandit", "llm", "heuristic"]);
    let ratings = rate_league(&recs, &policies, 50, 0).unwrap();
    let rows = policy_summary(&recs, &ratings, 0.6).unwrap();
    let got: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.win_rate_eff)).collect();
    assert_eq!(got, ["0.742", "0.571", "0.433", "0.254"]);
    assert!(rows.iter().all(|r| r.games == 120 && r.flag_rate == 1.0));
    // Ratings follow the win rates.
    assert!(ratings.ratings.windows(2).all(|w| w[0] > w[1]));
    assert!(ratings.ratings.iter().sum::<f64>().abs() < 1e-9);
}

/// Sum of squares about the mean for 10 composites at `low`, 32 at 0.6 and
/// 18 at whatever brings the mean to 1.18.
fn composites_for(low: f64) -> Vec<f64> {
    let high = (60.0 * 1.18 - 10.0 * low - 32.0 * 0.6) / 18.0;
    [vec![low; 10], vec![0.6; 32], vec![high; 18]].concat()
}

#[test]
fn exploit_row_format() {
    let target_sd = 0.145 * 60f64.sqrt();
    let sd = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    // sd falls as the low group rises toward the mean; bisect on it.
    let (mut lo, mut hi) = (0.0, 0.59);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if sd(&composites_for(mid)) > target_sd {
            lo = mid
        } else {
            hi = mid
        }
    }
    let values = composites_for(lo);
    let t = template_record();
    let recs: Vec<EpisodeRecord> = values
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let role = if k % 2 == 0 { Role::Plaintiff } else { Role::Defendant };
            let comps = if role == Role::Plaintiff { (c, 0.0) } else { (0.0, c) };
            synthetic_record(&t, "bandit", "heuristic", "permissive", role, 0.5, comps)
        })
        .collect();
    let rows = exploit_summary(&recs, &names(&["bandit"]), 0.6);
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    let cells = format!("{:.2} {:.3} {:.2} {}", r.mean_composite, r.se_composite, r.flag_rate, r.n_episodes);
    assert_eq!(cells, "1.18 0.145 0.83 60");
    // Opponent side holds the heuristic's composites: all zero, none flagged.
    let opp = exploit_summary(&recs, &names(&["heuristic"]), 0.6);
    assert_eq!((opp[0].mean_composite, opp[0].se_composite, opp[0].flag_rate), (0.0, 0.0, 0.0));
}

#[test]
fn exploit_summary_basics() {
    let t = template_record();
    let rec = |c: f64, judge| synthetic_record(&t, "x", "y", judge, Role::Plaintiff, 1.0, (c, 0.2));
    let recs = vec![rec(0.5, "strict"), rec(0.7, "strict"), rec(0.9, "permissive")];
    let rows = exploit_summary(&recs, &names(&["x", "y"]), 0.6);
    assert_eq!(rows.len(), 4);
    assert_eq!((rows[0].judge.as_str(), rows[0].flag_rate, rows[0].n_episodes), ("strict", 0.5, 2));
    assert!((rows[0].mean_composite - 0.6).abs() < 1e-12);
    let y = &rows[2];
    assert_eq!((y.mean_composite, y.se_composite, y.flag_rate), (0.2, 0.0, 0.0));
}

#[test]
fn synthetic_league_recovers_ratings() {
    let truth = [1.0, 0.2, -0.4, -0.8];
    let games = synthetic_league(&truth, 2000, 17);
    let s = btl_fit(4, &games).unwrap();
    assert!(s.iter().sum::<f64>().abs() < 1e-9);
    for i in 0..4 {
        for j in 0..4 {
            let d = (s[i] - s[j]) - (truth[i] - truth[j]);
            assert!(d.abs() < 0.25, "{i},{j}: {d}");
        }
    }
    let order = |v: &[f64]| {
        let mut ix: Vec<usize> = (0..v.len()).collect();
        ix.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
        ix
    };
    assert_eq!(order(&s), order(&truth));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Fits depend on rating differences only: relabelling which side is
    /// `i` (with y -> 1 - y) or adding a constant to the truth that drew
    /// the games leaves the sum-to-zero solution unchanged.
    #[test]
    fn btl_is_translation_and_orientation_invariant(
        truth in prop::collection::vec(-1.5..1.5f64, 3..6),
        shift in -5.0..5.0f64,
        seed in any::<u64>(),
    ) {
        let games = synthetic_league(&truth, 400, seed);
        let shifted: Vec<f64> = truth.iter().map(|s| s + shift).collect();
        prop_assert_eq!(&synthetic_league(&shifted, 400, seed), &games);
        let Ok(s) = btl_fit(truth.len(), &games) else { return Ok(()) };
        let flipped: Vec<Game> = games.iter().map(|g| Game { i: g.j, j: g.i, y: 1.0 - g.y }).collect();
        let f = btl_fit(truth.len(), &flipped).unwrap();
        prop_assert!(s.iter().sum::<f64>().abs() < 1e-9);
        for (a, b) in s.iter().zip(&f) {
            prop_assert!((a - b).abs() < 1e-7, "{} vs {}", a, b);
        }
    }
}

#[test]
fn small_sweep_point() {
    let rules = Arc::new(Regime::Bankruptcy.load().unwrap());
    let base = EnvConfig::default();
    let pool = PolicyPool::untrained(0);
    let league = LeagueConfig {
        policies: vec![PolicyKind::Heuristic, PolicyKind::Llm, PolicyKind::Ppo],
        ..LeagueConfig::default()
    };
    let cfg = SweepConfig { episodes: 30, resamples: 200, ..SweepConfig::new(SweepAxis::Sanction, league) };
    let (p, recs) = run_point(&base, &rules, &pool, &cfg, 0.9).unwrap();
    assert_eq!((p.n_episodes, recs.len()), (30, 30));
    assert!(p.ci_low <= p.mean_composite && p.mean_composite <= p.ci_high);
    assert!(recs.iter().all(|r| r.judge_profile.sanction_tendency == 0.9));
    assert_eq!(run_point(&base, &rules, &pool, &cfg, 0.9).unwrap().0, p);

    let noise = SweepConfig { axis: SweepAxis::Noise, ..cfg };
    let (zero, _) = run_point(&base, &rules, &pool, &noise, 0.0).unwrap();
    assert_eq!(zero.config_hash, base.content_hash());
}

#[test]
fn shipped_default_config_matches_code() {
    let text = include_str!("../../../configs/env_default.json");
    let cfg: EnvConfig = serde_json::from_str(text).unwrap();
    assert_eq!(cfg, EnvConfig::default());
}
