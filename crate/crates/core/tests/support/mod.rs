//! Independent reference computations shared by the integration tests and
//! the acceptance run.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use legalsim::evaluation::{sigmoid, Game};
use legalsim::learning::ppo::{loss_and_grads, masked_softmax};
use legalsim::learning::{ActorCritic, PpoConfig, Transition};
use legalsim::policies::bandit::{features, BanditModel, FEATURES};

/// A small random actor-critic and batch whose importance ratios stay away
/// from the clip boundaries, so the loss is smooth around the parameters.
pub struct Problem {
    pub net: ActorCritic,
    pub steps: Vec<Transition>,
    pub adv: Vec<f64>,
    pub returns: Vec<f64>,
    pub cfg: PpoConfig,
}

pub fn random_problem(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obs_dim = rng.gen_range(2..6);
    let n_actions = rng.gen_range(2..6);
    let hidden = rng.gen_range(3..9);
    let mut net = ActorCritic::new(obs_dim, n_actions, hidden, &mut rng);
    // Larger output weights than the 0.01 init so every term matters.
    for p in net.actor_params.iter_mut() {
        *p += rng.gen_range(-0.5..0.5);
    }
    let cfg = PpoConfig { entropy_coef: 0.05, ..PpoConfig::default() };
    let mut steps = Vec::new();
    let n = rng.gen_range(1..7);
    while steps.len() < n {
        let obs: Vec<f64> = (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut mask: Vec<bool> = (0..n_actions).map(|_| rng.gen_bool(0.7)).collect();
        let action = rng.gen_range(0..n_actions);
        mask[action] = true;
        let probs = masked_softmax(net.actor.forward(&net.actor_params, &obs).output(), &mask);
        let shift: f64 = rng.gen_range(-0.4..0.4);
        let ratio = shift.exp();
        let margin = 1e-3;
        if (ratio - (1.0 - cfg.clip)).abs() < margin || (ratio - (1.0 + cfg.clip)).abs() < margin {
            continue;
        }
        steps.push(Transition {
            obs,
            mask,
            action,
            log_prob: probs[action].ln() - shift,
            value: 0.0,
            reward: 0.0,
            done: false,
        });
    }
    let adv = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let returns = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    Problem { net, steps, adv, returns, cfg }
}

pub fn total_loss(p: &Problem, net: &ActorCritic) -> f64 {
    loss_and_grads(net, &p.steps, &p.adv, &p.returns, &p.cfg).0.total
}

/// Relative error `|g - g_fd| / max(|g| + |g_fd|, 1e-12)` of the analytic
/// gradient against central differences, over actor and critic together.
pub fn gradient_relative_error(p: &Problem) -> f64 {
    let (_, ga, gc) = loss_and_grads(&p.net, &p.steps, &p.adv, &p.returns, &p.cfg);
    let h = 1e-6;
    let mut diff = 0.0;
    let mut scale = 0.0;
    let mut fd = |which: usize, k: usize, analytic: f64| {
        let mut plus = p.net.clone();
        let mut minus = p.net.clone();
        if which == 0 {
            plus.actor_params[k] += h;
            minus.actor_params[k] -= h;
        } else {
            plus.critic_params[k] += h;
            minus.critic_params[k] -= h;
        }
        let numeric = (total_loss(p, &plus) - total_loss(p, &minus)) / (2.0 * h);
        diff += (analytic - numeric).powi(2);
        scale += analytic.powi(2) + numeric.powi(2);
    };
    for (k, g) in ga.iter().enumerate() {
        fd(0, k, *g);
    }
    for (k, g) in gc.iter().enumerate() {
        fd(1, k, *g);
    }
    diff.sqrt() / scale.sqrt().max(1e-12)
}

/// Indices of the output-layer weights and bias feeding logit `k`.
pub fn output_unit_params(net: &ActorCritic, k: usize) -> Vec<usize> {
    let sizes = net.actor.sizes();
    let (h, a) = (sizes[sizes.len() - 2], sizes[sizes.len() - 1]);
    let start = net.actor_params.len() - (h * a + a);
    let mut idx: Vec<usize> = (start + k * h..start + (k + 1) * h).collect();
    idx.push(start + h * a + k);
    idx
}

/// Advantages as explicit discounted sums of TD errors (no recursion).
pub fn gae_by_sums(rewards: &[f64], values: &[f64], dones: &[bool], last: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let delta: Vec<f64> = (0..n)
        .map(|t| {
            let next = if dones[t] {
                0.0
            } else if t + 1 < n {
                values[t + 1]
            } else {
                last
            };
            rewards[t] + gamma * next - values[t]
        })
        .collect();
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            let mut w = 1.0;
            for k in t..n {
                acc += w * delta[k];
                if dones[k] {
                    break;
                }
                w *= gamma * lambda;
            }
            acc
        })
        .collect()
}

/// Stationary one-step problem: a random context, and only `best` pays 1.
/// Returns the fraction of greedy-or-explore choices of `best` over the
/// last `window` of `episodes` episodes.
pub fn bandit_best_arm_rate(seed: u64, best: usize, episodes: usize, window: usize) -> f64 {
    let mut model = BanditModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for e in 0..episodes {
        let obs: Vec<f64> = (0..FEATURES - 1).map(|_| rng.gen::<f64>()).collect();
        let x = features(&obs);
        let arm = model.select(&x, &mut rng);
        let reward = if arm == best { 1.0 } else { 0.0 };
        model.update(&[(x, arm)], reward);
        if e >= episodes - window && arm == best {
            hits += 1;
        }
    }
    hits as f64 / window as f64
}

/// `games` games between uniformly drawn distinct pairs, outcomes drawn from
/// `sigmoid(s_i - s_j)`.
pub fn synthetic_league(truth: &[f64], games: usize, seed: u64) -> Vec<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = truth.len();
    (0..games)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let y = if rng.gen::<f64>() < sigmoid(truth[i] - truth[j]) { 1.0 } else { 0.0 };
            Game { i, j, y }
        })
        .collect()
}

/// A real episode record to clone synthetic records from.
pub fn template_record() -> legalsim::harness::EpisodeRecord {
    use legalsim::harness::{league_specs, run_match, LeagueConfig, PolicyPool};
    let rules = std::sync::Arc::new(legalsim::Regime::Bankruptcy.load().unwrap());
    let env = legalsim::Env::new(legalsim::EnvConfig::default(), rules).unwrap();
    let spec = league_specs(&LeagueConfig::default()).remove(0);
    run_match(&env, &PolicyPool::untrained(0), &spec, 0)
}

/// Template copy with the given pairing, judge, match score for `i` (1, 0.5
/// or 0) and per-role composites.
pub fn synthetic_record(
    template: &legalsim::harness::EpisodeRecord,
    i: &str,
    j: &str,
    judge: &str,
    i_role: legalsim::Role,
    score_i: f64,
    composites: (f64, f64),
) -> legalsim::harness::EpisodeRecord {
    use legalsim::state::{EndReason, Outcome};
    let mut r = template.clone();
    r.spec.policy_i = i.to_string();
    r.spec.policy_j = j.to_string();
    r.spec.judge = judge.to_string();
    r.spec.i_role = i_role;
    r.outcome = match score_i {
        0.5 => Outcome::settlement(10.0),
        1.0 => Outcome::win(i_role, EndReason::Judgment),
        _ => Outcome::win(i_role.opponent(), EndReason::Judgment),
    };
    r.plaintiff.components.composite = composites.0;
    r.defendant.components.composite = composites.1;
    r
}
