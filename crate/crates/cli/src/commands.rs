//! Implementations of the subcommands.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use legalsim::evaluation::{self, tables, SweepAxis, SweepConfig};
use legalsim::harness::{
    self, read_records, render_trace, run_league, to_jsonl, EpisodeRecord, Fixture, GeneratorSource, LeagueConfig,
    PolicyKind, PolicyPool, TrainConfig,
};
use legalsim::learning::Checkpoint;
use legalsim::policies::ppo::PpoMode;
use legalsim::policies::BanditModel;
use legalsim::token::ActionKind;
use legalsim::{env::OBS_DIM, load_rules, Env, EnvConfig, Regime};

use crate::output::{read_input, OutDir};
use crate::{EnvArgs, EvaluateArgs, LeagueArgs, OutArgs, ReplayArgs, SweepArgs, TrainArgs, TrainTarget, ValidateArgs};

pub const PPO_CHECKPOINT: &str = "ppo_checkpoint.json";
pub const BANDIT_CHECKPOINT: &str = "bandit_checkpoint.json";
pub const RECORDS: &str = "records.jsonl";

/// Saved bandit weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BanditCheckpoint {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub episodes: u64,
    pub model: BanditModel,
}

const BANDIT_FORMAT: &str = "legalsim-bandit";

/// Environment plus the regime label and input files it was built from.
struct Loaded {
    env: Env,
    regime: String,
    inputs: Vec<(PathBuf, Vec<u8>)>,
}

fn load_env(args: &EnvArgs) -> Result<Loaded> {
    let mut inputs = Vec::new();
    let config = match &args.config {
        Some(path) => {
            let bytes = read_input(path)?;
            let text = String::from_utf8(bytes.clone()).context("config is not UTF-8")?;
            let cfg = EnvConfig::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
            inputs.push((path.clone(), bytes));
            cfg
        }
        None => EnvConfig::default(),
    };
    let (rules, regime) = match &args.rules {
        Some(path) => {
            let bytes = read_input(path)?;
            let text = String::from_utf8(bytes.clone()).context("rule file is not UTF-8")?;
            let doc = load_rules(&text).with_context(|| format!("loading {}", path.display()))?;
            inputs.push((path.clone(), bytes));
            let label = path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
            (doc, label)
        }
        None => {
            let regime: Regime = args.regime.parse().map_err(|e: String| anyhow!(e))?;
            (regime.load()?, regime.name().to_string())
        }
    };
    let env = Env::new(config, Arc::new(rules))?;
    Ok(Loaded { env, regime, inputs })
}

fn record_inputs(out: &mut OutDir, loaded: &Loaded) {
    for (p, b) in &loaded.inputs {
        out.input(p, b);
    }
}

fn check_judges(env: &Env, judges: &[String]) -> Result<()> {
    if judges.is_empty() {
        bail!("at least one judge profile is required");
    }
    for j in judges {
        if env.config().judge(j).is_none() {
            let known: Vec<&String> = env.config().judges.keys().collect();
            bail!("unknown judge profile `{j}` (configured: {known:?})");
        }
    }
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> Result<bool> {
    let mut all_ok = true;
    for path in &args.rules {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        match load_rules(&text) {
            Ok(doc) => {
                println!("{}: valid, {} gates, {} rules", path.display(), doc.gates.len(), doc.rules.len());
            }
            Err(e) => {
                all_ok = false;
                println!("{}: invalid: {e}", path.display());
            }
        }
    }
    Ok(all_ok)
}

pub fn train(args: &TrainArgs, out_args: &OutArgs) -> Result<()> {
    let loaded = load_env(&args.env)?;
    check_judges(&loaded.env, &args.judges)?;
    let mut out = OutDir::prepare(&out_args.out, out_args.force)?;
    record_inputs(&mut out, &loaded);
    let env = &loaded.env;
    let hash = env.config().content_hash();
    let cfg = TrainConfig {
        episodes: args.episodes,
        master_seed: args.seed,
        judges: args.judges.clone(),
        regime: loaded.regime.clone(),
        ..TrainConfig::default()
    };
    if matches!(args.policy, TrainTarget::Ppo | TrainTarget::All) {
        let trained = harness::train_ppo(env, &cfg)?;
        let ckpt = Checkpoint::from_net(&trained.net, &cfg.ppo, &hash, trained.updates);
        out.write(PPO_CHECKPOINT, ckpt.to_json().as_bytes())?;
        let mut buf = Vec::new();
        tables::write_rows(&mut buf, &trained.curve)?;
        out.write("ppo_curve.csv", &buf)?;
        println!("ppo: {} episodes, {} updates, checkpoint {}", cfg.episodes, trained.updates, ckpt.content_hash());
    }
    if matches!(args.policy, TrainTarget::Bandit | TrainTarget::All) {
        let trained = harness::train_bandit(env, &cfg, BanditModel::default())?;
        let ckpt = BanditCheckpoint {
            format: BANDIT_FORMAT.to_string(),
            version: 1,
            config_hash: hash.clone(),
            episodes: cfg.episodes as u64,
            model: trained.model,
        };
        out.write(BANDIT_CHECKPOINT, serde_json::to_string_pretty(&ckpt)?.as_bytes())?;
        let mut buf = Vec::new();
        tables::write_rows(&mut buf, &trained.curve)?;
        out.write("bandit_curve.csv", &buf)?;
        println!("bandit: {} episodes, {} updates", cfg.episodes, trained.updates);
    }
    out.finish("train", args.seed, hash)?;
    Ok(())
}

/// Frozen policies for a league or sweep, loaded from a training output
/// directory when PPO or the bandit take part.
fn load_pool(
    checkpoints: Option<&Path>,
    policies: &[PolicyKind],
    greedy: bool,
    out: &mut OutDir,
) -> Result<PolicyPool> {
    let mut pool = PolicyPool::untrained(0);
    pool.generator = GeneratorSource::from_env();
    if greedy {
        pool.ppo_mode = PpoMode::Greedy;
    }
    let locate = |name: &str, kind: PolicyKind| -> Result<PathBuf> {
        let dir = checkpoints.ok_or_else(|| {
            anyhow!("policy `{kind}` needs a trained checkpoint; run `legalsim train` and pass --checkpoints DIR")
        })?;
        let path = dir.join(name);
        if !path.is_file() {
            bail!("missing checkpoint {} for policy `{kind}`", path.display());
        }
        Ok(path)
    };
    if policies.contains(&PolicyKind::Ppo) {
        let path = locate(PPO_CHECKPOINT, PolicyKind::Ppo)?;
        let bytes = read_input(&path)?;
        let text = String::from_utf8(bytes.clone()).context("checkpoint is not UTF-8")?;
        let ckpt = Checkpoint::from_json(&text, OBS_DIM, ActionKind::COUNT)
            .with_context(|| format!("loading {}", path.display()))?;
        pool.ppo = ckpt.net()?;
        out.input(&path, &bytes);
    }
    if policies.contains(&PolicyKind::Bandit) {
        let path = locate(BANDIT_CHECKPOINT, PolicyKind::Bandit)?;
        let bytes = read_input(&path)?;
        let ckpt: BanditCheckpoint =
            serde_json::from_slice(&bytes).with_context(|| format!("loading {}", path.display()))?;
        if ckpt.format != BANDIT_FORMAT {
            bail!("{} is not a bandit checkpoint", path.display());
        }
        pool.bandit = ckpt.model;
        out.input(&path, &bytes);
    }
    Ok(pool)
}

/// Writes the summary tables and heatmaps for a record set.
fn write_evaluation(out: &mut OutDir, records: &[EpisodeRecord], resamples: usize, seed: u64, flag: f64) -> Result<()> {
    let policies = evaluation::policies_in(records);
    let mut buf = Vec::new();
    tables::write_games(&mut buf, records)?;
    out.write("games.csv", &buf)?;

    let payoff = evaluation::build_payoff(records, Some(&policies))?;
    let mut buf = Vec::new();
    tables::write_win_matrix(&mut buf, &payoff)?;
    out.write("win_matrix.csv", &buf)?;
    let mut buf = Vec::new();
    tables::write_margin_matrix(&mut buf, &payoff)?;
    out.write("margin_matrix.csv", &buf)?;

    let ratings = evaluation::rate_league(records, &policies, resamples, seed)?;
    out.write("btl.json", serde_json::to_string_pretty(&ratings)?.as_bytes())?;
    let summary = evaluation::policy_summary(records, &ratings, flag)?;
    let mut buf = Vec::new();
    tables::write_rows(&mut buf, &summary)?;
    out.write("summary.csv", &buf)?;

    let exploit = evaluation::exploit_summary(records, &policies, flag);
    let mut buf = Vec::new();
    tables::write_rows(&mut buf, &exploit)?;
    out.write("exploit.csv", &buf)?;

    let bars = evaluation::win_rate_bars(records, &policies);
    let mut buf = Vec::new();
    tables::write_rows(&mut buf, &bars)?;
    out.write("winrate_bars.csv", &buf)?;

    println!(
        "{:<10} {:>8} {:>6} {:>9} {:>9} {:>8} {:>8} {:>8}",
        "policy", "win_eff", "flag", "C_pl", "C_df", "btl", "ci_lo", "ci_hi"
    );
    for r in &summary {
        println!(
            "{:<10} {:>8.3} {:>6.3} {:>9.3} {:>9.3} {:>8.1} {:>8.1} {:>8.1}",
            r.policy,
            r.win_rate_eff,
            r.flag_rate,
            r.mean_composite_plaintiff,
            r.mean_composite_defendant,
            r.btl,
            r.btl_ci_low,
            r.btl_ci_high
        );
    }
    Ok(())
}

pub fn league(args: &LeagueArgs, out_args: &OutArgs) -> Result<()> {
    let loaded = load_env(&args.env)?;
    check_judges(&loaded.env, &args.judges)?;
    let mut out = OutDir::prepare(&out_args.out, out_args.force)?;
    record_inputs(&mut out, &loaded);
    let pool = load_pool(args.checkpoints.as_deref(), &args.policies, args.ppo_greedy, &mut out)?;
    let cfg = LeagueConfig {
        policies: args.policies.clone(),
        seeds: (0..args.seeds).collect(),
        judges: args.judges.clone(),
        master_seed: args.seed,
        regime: loaded.regime.clone(),
        bandit_learning: args.bandit_learning,
        parallel: true,
    };
    let records = run_league(&loaded.env, &pool, &cfg)?;
    println!("league: {} games", records.len());
    out.write(RECORDS, to_jsonl(&records).as_bytes())?;
    out.write("league.json", serde_json::to_string_pretty(&cfg)?.as_bytes())?;
    let flag = loaded.env.config().exploit.flag_threshold;
    write_evaluation(&mut out, &records, args.resamples, args.seed, flag)?;
    out.finish("league", args.seed, loaded.env.config().content_hash())?;
    Ok(())
}

fn load_records(path: &Path) -> Result<(Vec<EpisodeRecord>, Vec<u8>)> {
    let bytes = read_input(path)?;
    let records =
        read_records(BufReader::new(bytes.as_slice())).with_context(|| format!("reading {}", path.display()))?;
    Ok((records, bytes))
}

pub fn evaluate(args: &EvaluateArgs, out_args: &OutArgs) -> Result<()> {
    let (records, bytes) = load_records(&args.records)?;
    if records.is_empty() {
        bail!("{} contains no records", args.records.display());
    }
    let config = match &args.config {
        Some(p) => EnvConfig::from_json(&fs::read_to_string(p)?).with_context(|| format!("loading {}", p.display()))?,
        None => EnvConfig::default(),
    };
    let mut out = OutDir::prepare(&out_args.out, out_args.force)?;
    out.input(&args.records, &bytes);
    write_evaluation(&mut out, &records, args.resamples, args.seed, config.exploit.flag_threshold)?;
    let hash = records[0].config_hash.clone();
    out.finish("evaluate", args.seed, hash)?;
    Ok(())
}

pub fn sweep(args: &SweepArgs, out_args: &OutArgs) -> Result<()> {
    let loaded = load_env(&args.env)?;
    check_judges(&loaded.env, &args.judges)?;
    let mut out = OutDir::prepare(&out_args.out, out_args.force)?;
    record_inputs(&mut out, &loaded);
    let pool = load_pool(args.checkpoints.as_deref(), &args.policies, args.ppo_greedy, &mut out)?;
    let league = LeagueConfig {
        policies: args.policies.clone(),
        seeds: vec![],
        judges: args.judges.clone(),
        master_seed: args.seed,
        regime: loaded.regime.clone(),
        bandit_learning: false,
        parallel: true,
    };
    let rules = loaded.env.rules_arc();
    for &axis in &args.axis {
        let cfg = SweepConfig { axis, league: league.clone(), episodes: args.episodes, resamples: args.resamples };
        let points = evaluation::run_sweep(loaded.env.config(), &rules, &pool, &cfg)?;
        println!("{axis}:");
        for p in &points {
            println!(
                "  {:>+5.2}  mean {:>8.3}  ci [{:.3}, {:.3}]  flag {:.3}  n {}",
                p.value, p.mean_composite, p.ci_low, p.ci_high, p.flag_rate, p.n_episodes
            );
        }
        let mut buf = Vec::new();
        tables::write_rows(&mut buf, &points)?;
        out.write(&format!("sweep_{axis}.csv"), &buf)?;
    }
    out.finish("sweep", args.seed, loaded.env.config().content_hash())?;
    Ok(())
}

pub fn replay(args: &ReplayArgs) -> Result<()> {
    let records = match (&args.record, &args.fixture) {
        (Some(path), None) => load_records(path)?.0,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let fixture = Fixture::from_json(&text)?;
            vec![fixture.run(args.seed)?]
        }
        (None, None) => {
            let fixture = Fixture::from_json(harness::DISCOVERY_LOOP)?;
            vec![fixture.run(args.seed)?]
        }
        (Some(_), Some(_)) => bail!("pass either a record file or --fixture, not both"),
    };
    let chosen: Vec<&EpisodeRecord> = match args.index {
        Some(k) => {
            vec![records.get(k).ok_or_else(|| anyhow!("record index {k} out of range ({} records)", records.len()))?]
        }
        None => records.iter().collect(),
    };
    for (k, rec) in chosen.into_iter().enumerate() {
        if k > 0 {
            println!();
        }
        print!("{}", render_trace(rec));
    }
    Ok(())
}

/// Axis names accepted on the command line.
pub fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse()
}
