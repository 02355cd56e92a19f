//! Bradley-Terry-Luce ratings: `Pr(i beats j) = sigmoid(s_i - s_j)`, fitted by
//! damped Newton ascent on the ridge-penalised log-likelihood and reported
//! with the ratings summing to zero.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::{percentile, EvalError};
use crate::harness::EpisodeRecord;
use crate::rng::{derive_index, stream};

pub const RIDGE: f64 = 1e-6;
pub const GRADIENT_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 500;
/// Ratings are multiplied by this for reports.
pub const DISPLAY_SCALE: f64 = 100.0;
/// Redraws allowed per bootstrap resample before giving up.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BtlError {
    #[error("need at least two policies")]
    TooFewPolicies,
    #[error("game references policy index {0} outside 0..{1}")]
    BadIndex(usize, usize),
    #[error("comparison graph is disconnected")]
    Disconnected,
    #[error("no convergence after {0} iterations (gradient norm {1:e})")]
    NoConvergence(usize, f64),
    #[error("resample {0} stayed disconnected after {MAX_REDRAWS} redraws")]
    Redraws(usize),
}

/// One game from the perspective of `i`: `y` is 1 for a win of `i`, 0.5 for
/// a settlement and 0 for a loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Game {
    pub i: usize,
    pub j: usize,
    pub y: f64,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Converts records to games over `policies`, skipping unlisted policies.
pub fn games_from_records(records: &[EpisodeRecord], policies: &[String]) -> Vec<Game> {
    let idx = |p: &str| policies.iter().position(|q| q == p);
    records
        .iter()
        .filter_map(|r| {
            let i = idx(&r.spec.policy_i)?;
            let j = idx(&r.spec.policy_j)?;
            (i != j).then(|| Game { i, j, y: r.score_i() })
        })
        .collect()
}

/// Games folded into per-ordered-pair totals (`i < j`).
#[derive(Debug, Clone)]
struct PairTotals {
    n: usize,
    /// (i, j, games, total y for i)
    pairs: Vec<(usize, usize, f64, f64)>,
}

impl PairTotals {
    fn new(n: usize, games: &[Game]) -> Result<Self, BtlError> {
        let mut count = vec![0.0; n * n];
        let mut wins = vec![0.0; n * n];
        for g in games {
            if g.i >= n || g.j >= n {
                return Err(BtlError::BadIndex(g.i.max(g.j), n));
            }
            if g.i == g.j {
                continue;
            }
            let (a, b, y) = if g.i < g.j { (g.i, g.j, g.y) } else { (g.j, g.i, 1.0 - g.y) };
            count[a * n + b] += 1.0;
            wins[a * n + b] += y;
        }
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if count[a * n + b] > 0.0 {
                    pairs.push((a, b, count[a * n + b], wins[a * n + b]));
                }
            }
        }
        Ok(PairTotals { n, pairs })
    }

    fn connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b, _, _) in &self.pairs {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        (0..self.n).all(|x| find(&mut parent, x) == root)
    }

    fn objective(&self, s: &[f64]) -> f64 {
        let mut f = -0.5 * RIDGE * s.iter().map(|x| x * x).sum::<f64>();
        for &(a, b, n, w) in &self.pairs {
            let d = s[a] - s[b];
            // w log sigmoid(d) + (n - w) log sigmoid(-d)
            f -= w * softplus(-d) + (n - w) * softplus(d);
        }
        f
    }

    fn gradient_hessian(&self, s: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut g: Vec<f64> = s.iter().map(|x| -RIDGE * x).collect();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = -RIDGE;
        }
        for &(a, b, c, w) in &self.pairs {
            let p = sigmoid(s[a] - s[b]);
            let r = w - c * p;
            g[a] += r;
            g[b] -= r;
            let k = c * p * (1.0 - p);
            h[a * n + a] -= k;
            h[b * n + b] -= k;
            h[a * n + b] += k;
            h[b * n + a] += k;
        }
        (g, h)
    }
}

fn center(s: &mut [f64]) {
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    s.iter_mut().for_each(|x| *x -= mean);
}

/// Solves `a x = b` for a dense `n x n` system by Gaussian elimination with
/// partial pivoting. `None` if the matrix is numerically singular.
fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    Some(x)
}

/// Maximum-likelihood ratings for `n` policies, summing to zero.
pub fn btl_fit(n: usize, games: &[Game]) -> Result<Vec<f64>, BtlError> {
    if n < 2 {
        return Err(BtlError::TooFewPolicies);
    }
    let totals = PairTotals::new(n, games)?;
    if !totals.connected() {
        return Err(BtlError::Disconnected);
    }
    fit_totals(&totals)
}

fn fit_totals(totals: &PairTotals) -> Result<Vec<f64>, BtlError> {
    let n = totals.n;
    let mut s = vec![0.0; n];
    let mut f = totals.objective(&s);
    let mut norm = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let (g, h) = totals.gradient_hessian(&s);
        norm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm < GRADIENT_TOLERANCE {
            center(&mut s);
            return Ok(s);
        }
        // Newton direction for a concave objective: -H^{-1} g.
        let neg_h: Vec<f64> = h.iter().map(|x| -x).collect();
        let step = solve(neg_h, g.clone()).unwrap_or(g);
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = s.iter().zip(&step).map(|(x, d)| x + t * d).collect();
            let fc = totals.objective(&cand);
            // Near the optimum the gain is below rounding noise in `f`.
            if fc >= f - 1e-12 * (1.0 + f.abs()) || t < 1e-12 {
                s = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
        center(&mut s);
        f = f.max(totals.objective(&s));
    }
    Err(BtlError::NoConvergence(MAX_ITERATIONS, norm))
}

/// Percentile bootstrap over games: each resample draws `games.len()` games
/// with replacement (redrawing if the comparison graph comes out
/// disconnected) and refits. Returns `(low, high)` per policy.
pub fn bootstrap_ci(
    n: usize,
    games: &[Game],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>, BtlError> {
    if n < 2 {
        return Err(BtlError::TooFewPolicies);
    }
    PairTotals::new(n, games)?;
    let fits: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let base = derive_index(seed, b as u64);
            for attempt in 0..MAX_REDRAWS {
                let mut rng = stream(derive_index(base, attempt as u64));
                let sample: Vec<Game> = (0..games.len()).map(|_| games[rng.gen_range(0..games.len())]).collect();
                let totals = PairTotals::new(n, &sample)?;
                if totals.connected() {
                    return fit_totals(&totals);
                }
            }
            Err(BtlError::Redraws(b))
        })
        .collect::<Result<_, _>>()?;
    let tail = (1.0 - level) / 2.0;
    Ok((0..n)
        .map(|k| {
            let mut col: Vec<f64> = fits.iter().map(|s| s[k]).collect();
            col.sort_by(f64::total_cmp);
            (percentile(&col, tail), percentile(&col, 1.0 - tail))
        })
        .collect())
}

/// Ratings with their bootstrap intervals, natural scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BtlRatings {
    pub policies: Vec<String>,
    pub ratings: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
    pub display_scale: f64,
    pub resamples: usize,
}

impl BtlRatings {
    pub fn display(&self, k: usize) -> (f64, f64, f64) {
        let (lo, hi) = self.ci[k];
        (self.ratings[k] * self.display_scale, lo * self.display_scale, hi * self.display_scale)
    }

    /// Model probability that policy `a` beats policy `b`.
    pub fn win_probability(&self, a: usize, b: usize) -> f64 {
        sigmoid(self.ratings[a] - self.ratings[b])
    }
}

/// Fit plus 95% bootstrap intervals over the league games of `policies`.
pub fn rate_league(
    records: &[EpisodeRecord],
    policies: &[String],
    resamples: usize,
    seed: u64,
) -> Result<BtlRatings, EvalError> {
    let games = games_from_records(records, policies);
    let ratings = btl_fit(policies.len(), &games)?;
    let ci = bootstrap_ci(policies.len(), &games, resamples, 0.95, seed)?;
    Ok(BtlRatings { policies: policies.to_vec(), ratings, ci, display_scale: DISPLAY_SCALE, resamples })
}
