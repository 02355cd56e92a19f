//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Run with `cargo test --test acceptance`.

mod support;

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use legalsim::evaluation::{bootstrap_ci, btl_fit, effective_win_rate, run_sweep, sigmoid, SweepAxis, SweepConfig};
use legalsim::harness::{
    render_trace, run_league, to_jsonl, train_bandit, train_ppo, Fixture, LeagueConfig, PolicyKind, PolicyPool,
    TrainConfig, DISCOVERY_LOOP,
};
use legalsim::learning::gae::compute_gae;
use legalsim::learning::ppo::loss_and_grads;
use legalsim::learning::ActorCritic;
use legalsim::metrics::{exploit_components, is_flagged, ExploitComponents};
use legalsim::policies::bandit::BanditModel;
use legalsim::rng::stream;
use legalsim::rules::ActiveGate;
use legalsim::token::{ActionKind, ActionToken};
use legalsim::{Env, EnvConfig, JudgeProfile, Regime, Role};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn env(regime: Regime) -> Env {
    Env::new(EnvConfig::default(), Arc::new(regime.load().unwrap())).unwrap()
}

const STAYED: [ActionKind; 3] = [ActionKind::RequestDocs, ActionKind::MoveCompel, ActionKind::MoveSanctions];

fn rule_engine() -> Outcome {
    let e = env(Regime::Tax);
    let mut s = e.reset(JudgeProfile::PERMISSIVE, 1);
    let mut rng = stream(1);
    let fees_before = s.defendant.fees;
    let petition = ActionToken::new(ActionKind::FileProceeding).with("proceeding_type", "tax_petition");
    e.step(&mut s, Role::Defendant, &petition, &mut rng).map_err(|e| e.to_string())?;
    let stay = |s: &legalsim::CaseState| s.gate("collection_stay").map(|g| g.remaining);
    ensure(stay(&s) == Some(20), || format!("stay after petition {:?}", stay(&s)))?;
    ensure(s.defendant.fees - fees_before == 2.0, || format!("self cost {}", s.defendant.fees - fees_before))?;
    ensure(s.defendant.delay_credit == 1.0, || format!("delay credit {}", s.defendant.delay_credit))?;
    for role in Role::BOTH {
        let legal = e.legal_actions(&s, role).unwrap();
        for k in STAYED {
            ensure(!legal.contains(k), || format!("{k:?} legal for {role} under the stay"))?;
        }
    }
    // One tick (19 left), then the citation: +3, and the step's own tick.
    e.step(&mut s, Role::Plaintiff, &ActionToken::noop(), &mut rng).unwrap();
    let before = stay(&s).unwrap();
    let cite = ActionToken::new(ActionKind::ReferenceAuthority).with("code", "26 USC 6331");
    e.step(&mut s, Role::Defendant, &cite, &mut rng).unwrap();
    let after = stay(&s).unwrap();
    ensure(after + 1 - before == 3, || format!("citation moved the stay {before} -> {after}"))?;

    let mut s = e.reset(JudgeProfile::STRICT, 2);
    s.active_gates.push(ActiveGate { name: "offshore_complexity".into(), remaining: 5 });
    for role in Role::BOTH {
        ensure(!e.legal_actions(&s, role).unwrap().contains(ActionKind::MoveSanctions), || {
            format!("MOVE_SANCTIONS legal for {role} under offshore_complexity")
        })?;
    }
    Ok("stay 20, cost 2.0, credit 1, citation +3".into())
}

fn stay_scenario() -> Outcome {
    let e = env(Regime::Bankruptcy);
    let mut s = e.reset(JudgeProfile::PERMISSIVE, 3);
    let mut rng = stream(3);
    let filing = ActionToken::new(ActionKind::FileProceeding).with("proceeding_type", "bankruptcy").with("chapter", 11);
    e.step(&mut s, Role::Defendant, &filing, &mut rng).unwrap();
    let blocked = [ActionKind::FileMotion, ActionKind::RequestDocs, ActionKind::MoveCompel, ActionKind::MoveSanctions];
    let mut role = Role::Plaintiff;
    let mut steps = 0;
    while blocked.iter().all(|&k| Role::BOTH.iter().all(|&r| !e.legal_actions(&s, r).unwrap().contains(k))) {
        e.step(&mut s, role, &ActionToken::noop(), &mut rng).unwrap();
        role = role.opponent();
        steps += 1;
        ensure(steps <= 200, || "stay never lifted".into())?;
    }
    ensure(steps == 60, || format!("blocked for {steps} steps"))?;
    for k in blocked {
        for r in Role::BOTH {
            ensure(e.legal_actions(&s, r).unwrap().contains(k), || format!("{k:?} still blocked for {r}"))?;
        }
    }
    Ok(format!("blocked for {steps} steps, then legal"))
}

fn metric_exactness() -> Outcome {
    let e = env(Regime::Bankruptcy);
    let cfg = e.config().exploit.clone();
    let mut s = e.reset(JudgeProfile::PERMISSIVE, 0);
    s.plaintiff.fees = 5.0;
    s.defendant.fees = 10.0;
    s.plaintiff.burden = 1.0;
    s.defendant.burden = 4.0;
    let c = exploit_components(&s, Role::Plaintiff, 100.0, &cfg);
    ensure((c.cost_inflation - 2.0).abs() < 1e-12, || format!("cost_inflation {}", c.cost_inflation))?;
    ensure((c.calendar_pressure - 2.0).abs() < 1e-12, || format!("calendar_pressure {}", c.calendar_pressure))?;
    let ones = ExploitComponents::from_parts([1.0; 4], cfg.weights);
    ensure((ones.composite - 1.0).abs() < 1e-12, || format!("composite(1,1,1,1) {}", ones.composite))?;
    let at = |x: f64| ExploitComponents { composite: x, ..ones };
    ensure(is_flagged(&at(0.6), &cfg) && !is_flagged(&at(0.6 - 1e-12), &cfg), || "flag boundary".into())?;

    let t = support::template_record();
    let mut recs = Vec::new();
    for (k, score) in [1.0, 1.0, 1.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0].into_iter().enumerate() {
        let role = if k % 2 == 0 { Role::Plaintiff } else { Role::Defendant };
        recs.push(support::synthetic_record(&t, "a", "b", "strict", role, score, (0.0, 0.0)));
    }
    let w = effective_win_rate(&recs, "a").map_err(|e| e.to_string())?;
    ensure((w - 0.4).abs() < 1e-12, || format!("win rate {w}"))?;
    Ok("2.0, 2.0, 1.0, flag at 0.6, 0.400".into())
}

fn ppo_numerics() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let p = support::random_problem(seed);
        let err = support::gradient_relative_error(&p);
        worst = worst.max(err);
        ensure(err < 1e-4, || format!("seed {seed}: relative error {err:.3e}"))?;

        let n = p.net.actor.output_dim();
        let masked = seed as usize % n;
        let mut q = p;
        for s in &mut q.steps {
            s.mask[masked] = false;
            s.mask[(masked + 1) % n] = true;
            if s.action == masked {
                s.action = (masked + 1) % n;
            }
        }
        let (_, ga, _) = loss_and_grads(&q.net, &q.steps, &q.adv, &q.returns, &q.cfg);
        for k in support::output_unit_params(&q.net, masked) {
            ensure(ga[k] == 0.0, || format!("masked gradient {} at {k}", ga[k]))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        use rand::Rng;
        let n = rng.gen_range(1..30);
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let d: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.2)).collect();
        let (last, gamma) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..=1.0));
        let (adv, _) = compute_gae(&r, &v, &d, last, gamma, 0.0).unwrap();
        for t in 0..n {
            let next = if d[t] {
                0.0
            } else if t + 1 < n {
                v[t + 1]
            } else {
                last
            };
            let td = r[t] + gamma * next - v[t];
            ensure((adv[t] - td).abs() < 1e-12, || format!("GAE(0) {} vs TD {td}", adv[t]))?;
        }
    }
    Ok(format!("worst gradient relative error {worst:.2e}"))
}

fn two_policy_league(seed: u64) -> LeagueConfig {
    LeagueConfig {
        policies: vec![PolicyKind::Ppo, PolicyKind::Heuristic],
        master_seed: seed,
        ..LeagueConfig::default()
    }
}

fn training_efficacy(nets: &mut Vec<ActorCritic>) -> Outcome {
    let e = env(Regime::Bankruptcy);
    let mut rates = Vec::new();
    for seed in 0..3 {
        let trained =
            train_ppo(&e, &TrainConfig { master_seed: seed, ..TrainConfig::default() }).map_err(|e| e.to_string())?;
        let pool = PolicyPool::new(BanditModel::default(), trained.net.clone());
        let recs = run_league(&e, &pool, &two_policy_league(seed)).map_err(|e| e.to_string())?;
        ensure(recs.len() == 40, || format!("{} evaluation games", recs.len()))?;
        rates.push(effective_win_rate(&recs, "ppo").map_err(|e| e.to_string())?);
        nets.push(trained.net);
    }
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.3}")).collect();
    ensure(rates.iter().all(|&r| r > 0.55), || format!("win rates {shown:?}"))?;
    Ok(format!("PPO vs heuristic win rate_eff {}", shown.join(", ")))
}

fn bandit_sanity() -> Outcome {
    ensure(BanditModel::default().epsilon == 0.1, || "epsilon is not 0.1".into())?;
    let mut worst: f64 = 1.0;
    for (seed, best) in (0..10).map(|s| (s, s as usize % 5)) {
        let rate = support::bandit_best_arm_rate(seed, best, 500, 100);
        worst = worst.min(rate);
        ensure(rate >= 0.8, || format!("seed {seed}, arm {best}: {rate:.2}"))?;
    }
    Ok(format!("worst best-arm rate {worst:.2} over 10 runs"))
}

const TRUTH: [f64; 4] = [1.0, 0.2, -0.4, -0.8];

fn btl_recovery() -> Outcome {
    let games = support::synthetic_league(&TRUTH, 2000, 2024);
    let s = btl_fit(4, &games).map_err(|e| e.to_string())?;
    ensure(s.iter().sum::<f64>().abs() < 1e-9, || format!("sum {}", s.iter().sum::<f64>()))?;
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((sigmoid(s[i] - s[j]) - sigmoid(TRUTH[i] - TRUTH[j])).abs());
        }
    }
    ensure(worst <= 0.05, || format!("pairwise probability error {worst:.3}"))?;
    let mut good = 0;
    for trial in 0..100u64 {
        let g = support::synthetic_league(&TRUTH, 2000, 10_000 + trial);
        let ci = bootstrap_ci(4, &g, 500, 0.95, trial).map_err(|e| e.to_string())?;
        let covered = ci.iter().zip(TRUTH).filter(|((lo, hi), t)| lo <= t && t <= hi).count();
        if covered >= 3 {
            good += 1;
        }
    }
    ensure(good >= 90, || format!("{good}/100 trials covered >= 3 of 4"))?;
    Ok(format!("max pairwise error {worst:.3}; {good}/100 trials cover >= 3 of 4"))
}

fn league_bookkeeping(pool: &PolicyPool) -> Outcome {
    let e = env(Regime::Bankruptcy);
    let cfg = LeagueConfig::default();
    let recs = run_league(&e, pool, &cfg).map_err(|e| e.to_string())?;
    let mut cells: HashMap<(String, String), [usize; 2]> = HashMap::new();
    for r in &recs {
        for (k, role) in Role::BOTH.into_iter().enumerate() {
            cells.entry((r.spec.policy_for(role).to_string(), r.spec.judge.clone())).or_default()[k] += 1;
        }
    }
    let participations: usize = cells.values().map(|c| c[0] + c[1]).sum();
    ensure(recs.len() == 240 && participations == 480, || {
        format!("{} games, {participations} role-assigned participations", recs.len())
    })?;
    ensure(cells.len() == 8 && cells.values().all(|c| *c == [30, 30]), || format!("cells {cells:?}"))?;
    let again = run_league(&e, pool, &cfg).unwrap();
    let serial = run_league(&e, pool, &LeagueConfig { parallel: false, ..cfg }).unwrap();
    let text = to_jsonl(&recs);
    ensure(to_jsonl(&again) == text && to_jsonl(&serial) == text, || "rerun differs".into())?;
    Ok(format!("240 games = 480 role-assigned participations, 8 cells of 30/30, {} bytes identical", text.len()))
}

fn sweep_mechanics(pool: &PolicyPool) -> Outcome {
    let rules = Arc::new(Regime::Bankruptcy.load().unwrap());
    let base = EnvConfig::default();
    let mut lines = Vec::new();
    for (axis, want) in
        [(SweepAxis::Sanction, [0.10, 0.25, 0.50, 0.75, 0.90]), (SweepAxis::Noise, [-0.20, -0.10, 0.00, 0.10, 0.20])]
    {
        let cfg = SweepConfig::new(axis, LeagueConfig::default());
        let points = run_sweep(&base, &rules, pool, &cfg).map_err(|e| e.to_string())?;
        let values: Vec<f64> = points.iter().map(|p| p.value).collect();
        ensure(values == want, || format!("{axis} points {values:?}"))?;
        for p in &points {
            ensure(p.n_episodes == 60, || format!("{axis} {}: n = {}", p.value, p.n_episodes))?;
            ensure(p.ci_low <= p.mean_composite && p.mean_composite <= p.ci_high, || {
                format!("{axis} {}: CI [{}, {}] misses {}", p.value, p.ci_low, p.ci_high, p.mean_composite)
            })?;
        }
        let means: Vec<String> = points.iter().map(|p| format!("{:.2}", p.mean_composite)).collect();
        lines.push(format!("{axis} [{}]", means.join(" ")));
    }
    Ok(lines.join("; "))
}

const LISTED_PLAINTIFF: &str = r#"[
  {"type":"MEET_CONFER"},
  {"type":"REQUEST_DOCS", "params":{"custodians":10,"complexity":0.6}},
  {"type":"SETTLEMENT_OFFER", "params":{"amount":100000,"importance":0.8}},
  {"type":"REQUEST_DOCS", "params":{"custodians":12,"complexity":0.6}},
  {"type":"REQUEST_DOCS", "params":{"custodians":8,"complexity":0.55}}
]"#;

const LISTED_DEFENDANT: &str = r#"[
  {"type":"FILE_MOTION", "params":{"kind":"protective","aggr":0.2}},
  {"type":"RESPOND_MOTION"},
  {"type":"RESPOND_MOTION"}
]"#;

/// The JSON list printed after `label:` in a rendered trace.
fn listed_after(trace: &str, label: &str) -> Option<serde_json::Value> {
    let start = trace.find(&format!("{label}: ["))? + label.len() + 2;
    let end = start + trace[start..].find("\n]")? + 2;
    serde_json::from_str(&trace[start..end]).ok()
}

fn replay_fidelity() -> Outcome {
    let fx = Fixture::from_json(DISCOVERY_LOOP).map_err(|e| e.to_string())?;
    let rec = fx.run(0).map_err(|e| e.to_string())?;
    let trace = render_trace(&rec);
    for (label, listed) in [("plaintiff_seq", LISTED_PLAINTIFF), ("defendant_seq", LISTED_DEFENDANT)] {
        let want: serde_json::Value = serde_json::from_str(listed).unwrap();
        let got = listed_after(&trace, label).ok_or_else(|| format!("{label} missing from trace"))?;
        ensure(got == want, || format!("{label}: got {got}"))?;
    }
    ensure(rec.violation_log.is_empty(), || format!("violations {:?}", rec.violation_log))?;
    Ok("5 plaintiff and 3 defendant tokens reproduced".into())
}

fn main() -> ExitCode {
    let mut nets = Vec::new();
    let mut failures = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let res = f();
        let secs = t0.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {n:>2} {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {n:>2} {name} ({secs:.1}s): {detail}");
            }
        }
    };
    report(1, "rule-engine conformance", &mut rule_engine);
    report(2, "stay scenario", &mut stay_scenario);
    report(3, "metric exactness", &mut metric_exactness);
    report(4, "PPO numerics", &mut ppo_numerics);
    report(5, "training efficacy", &mut || training_efficacy(&mut nets));
    report(6, "bandit sanity", &mut bandit_sanity);
    report(7, "BTL recovery", &mut btl_recovery);
    let net = nets.first().cloned().unwrap_or_else(|| PolicyPool::untrained(0).ppo);
    // Criteria 8 and 9 use trained learners, as the CLI league would.
    let bandit = train_bandit(&env(Regime::Bankruptcy), &TrainConfig::default(), BanditModel::default())
        .map(|b| b.model)
        .unwrap_or_default();
    let pool = PolicyPool::new(bandit, net);
    report(8, "league bookkeeping", &mut || league_bookkeeping(&pool));
    report(9, "sweep mechanics", &mut || sweep_mechanics(&pool));
    report(10, "replay fidelity", &mut replay_fidelity);
    if failures == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
