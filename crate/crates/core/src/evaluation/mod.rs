//! Metrics over league records: win rates, cross-play matrices, BTL ratings
//! with bootstrap intervals, exploit summaries and robustness sweeps.

pub mod btl;
pub mod payoff;
pub mod summary;
pub mod sweep;
pub mod tables;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::env::EnvError;
use crate::rng::{derive_index, stream};

pub use btl::{bootstrap_ci, btl_fit, games_from_records, rate_league, sigmoid, BtlError, BtlRatings, Game};
pub use payoff::{build_payoff, effective_win_rate, judges_in, policies_in, tally, PayoffMatrix, Tally};
pub use summary::{exploit_summary, policy_summary, win_rate_bars, CompositeStats, ExploitRow, PolicySummaryRow};
pub use sweep::{run_point, run_sweep, sweep_specs, SweepAxis, SweepConfig, SweepPoint};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("policy `{0}` has no games")]
    NoGames(String),
    #[error("need at least two policies")]
    TooFewPolicies,
    #[error("no games between `{0}` and `{1}`")]
    MissingPair(String, String),
    #[error("unknown judge profile `{0}`")]
    UnknownJudge(String),
    #[error(transparent)]
    Btl(#[from] BtlError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval of the mean at the given level.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, level: f64, seed: u64) -> (f64, f64) {
    if values.is_empty() || resamples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(derive_index(seed, b as u64));
            (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (percentile(&means, tail), percentile(&means, 1.0 - tail))
}
