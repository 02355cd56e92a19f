//! CSV output for summary tables, heatmaps and per-game rows.

use std::io::Write;

use serde::Serialize;

use super::payoff::PayoffMatrix;
use crate::harness::EpisodeRecord;
use crate::state::Role;

/// Writes `rows` with a header taken from the row type's field names.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Square matrix with policy names as the first row and column; the
/// diagonal is left empty.
pub fn write_matrix<W: Write>(out: W, policies: &[String], cells: &[Vec<Option<f64>>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["policy".to_string()];
    header.extend(policies.iter().cloned());
    w.write_record(&header)?;
    for (p, row) in policies.iter().zip(cells) {
        let mut line = vec![p.clone()];
        line.extend(row.iter().map(|c| c.map_or(String::new(), |v| v.to_string())));
        w.write_record(&line)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_win_matrix<W: Write>(out: W, m: &PayoffMatrix) -> csv::Result<()> {
    write_matrix(out, &m.policies, &m.win)
}

pub fn write_margin_matrix<W: Write>(out: W, m: &PayoffMatrix) -> csv::Result<()> {
    write_matrix(out, &m.policies, &m.margin)
}

/// One line per league game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameRow {
    pub policy_i: String,
    pub policy_j: String,
    pub judge: String,
    pub seed: u64,
    pub i_role: Role,
    pub plaintiff: String,
    pub defendant: String,
    pub outcome: String,
    pub reason: String,
    pub score_i: f64,
    pub steps: usize,
    pub composite_plaintiff: f64,
    pub composite_defendant: f64,
    pub fees_plaintiff: f64,
    pub fees_defendant: f64,
    pub sanctions_plaintiff: u32,
    pub sanctions_defendant: u32,
    pub violations: usize,
}

impl GameRow {
    pub fn from_record(r: &EpisodeRecord) -> Self {
        GameRow {
            policy_i: r.spec.policy_i.clone(),
            policy_j: r.spec.policy_j.clone(),
            judge: r.spec.judge.clone(),
            seed: r.spec.seed,
            i_role: r.spec.i_role,
            plaintiff: r.spec.plaintiff().to_string(),
            defendant: r.spec.defendant().to_string(),
            outcome: r.outcome.kind.as_str().to_string(),
            reason: r.outcome.reason.as_str().to_string(),
            score_i: r.score_i(),
            steps: r.steps.len(),
            composite_plaintiff: r.composite(Role::Plaintiff),
            composite_defendant: r.composite(Role::Defendant),
            fees_plaintiff: r.plaintiff.fees,
            fees_defendant: r.defendant.fees,
            sanctions_plaintiff: r.plaintiff.sanction_count,
            sanctions_defendant: r.defendant.sanction_count,
            violations: r.violation_log.len(),
        }
    }
}

/// Serialized name of a unit enum variant.
pub fn write_games<W: Write>(out: W, records: &[EpisodeRecord]) -> csv::Result<()> {
    let rows: Vec<GameRow> = records.iter().map(GameRow::from_record).collect();
    write_rows(out, &rows)
}
