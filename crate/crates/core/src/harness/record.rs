//! JSON-lines episode records: one header line, one line per step and one
//! footer line per episode.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::episode::{EpisodeRecord, EpisodeSeeds, MatchSpec, PartySummary, StepEntry};
use crate::state::{JudgeProfile, Outcome};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {message}")]
    Structure { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Header { spec: MatchSpec, judge_profile: JudgeProfile, seeds: EpisodeSeeds, config_hash: String },
    Step(StepEntry),
    Footer { outcome: Outcome, plaintiff: PartySummary, defendant: PartySummary, violation_log: Vec<String> },
}

pub fn write_record<W: Write>(out: &mut W, rec: &EpisodeRecord) -> std::io::Result<()> {
    let header = Line::Header {
        spec: rec.spec.clone(),
        judge_profile: rec.judge_profile,
        seeds: rec.seeds,
        config_hash: rec.config_hash.clone(),
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for s in &rec.steps {
        writeln!(out, "{}", serde_json::to_string(&Line::Step(s.clone()))?)?;
    }
    let footer = Line::Footer {
        outcome: rec.outcome.clone(),
        plaintiff: rec.plaintiff.clone(),
        defendant: rec.defendant.clone(),
        violation_log: rec.violation_log.clone(),
    };
    writeln!(out, "{}", serde_json::to_string(&footer)?)
}

pub fn to_jsonl(records: &[EpisodeRecord]) -> String {
    let mut buf = Vec::new();
    for r in records {
        write_record(&mut buf, r).expect("writing to memory");
    }
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn read_records<R: BufRead>(input: R) -> Result<Vec<EpisodeRecord>, RecordError> {
    let mut out = Vec::new();
    let mut open: Option<(usize, EpisodeRecord)> = None;
    for (i, line) in input.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|source| RecordError::Json { line: n, source })?;
        let structure = |m: &str| RecordError::Structure { line: n, message: m.to_string() };
        match parsed {
            Line::Header { spec, judge_profile, seeds, config_hash } => {
                if open.is_some() {
                    return Err(structure("header before previous footer"));
                }
                let placeholder = Outcome::settlement(0.0);
                let empty = PartySummary {
                    budget: 0.0,
                    fees: 0.0,
                    burden: 0.0,
                    sanction_count: 0,
                    sanction_penalty: 0.0,
                    merits: 0.0,
                    delay_credit: 0.0,
                    settlement_offers: vec![],
                    components: Default::default(),
                    violations: 0,
                };
                open = Some((
                    n,
                    EpisodeRecord {
                        spec,
                        judge_profile,
                        seeds,
                        config_hash,
                        steps: vec![],
                        outcome: placeholder,
                        plaintiff: empty.clone(),
                        defendant: empty,
                        violation_log: vec![],
                    },
                ));
            }
            Line::Step(s) => match open.as_mut() {
                Some((_, rec)) => rec.steps.push(s),
                None => return Err(structure("step outside an episode")),
            },
            Line::Footer { outcome, plaintiff, defendant, violation_log } => {
                let Some((_, mut rec)) = open.take() else {
                    return Err(structure("footer without header"));
                };
                rec.outcome = outcome;
                rec.plaintiff = plaintiff;
                rec.defendant = defendant;
                rec.violation_log = violation_log;
                out.push(rec);
            }
        }
    }
    if let Some((start, _)) = open {
        return Err(RecordError::Structure { line: start, message: "episode has no footer".into() });
    }
    Ok(out)
}
