//! CSV writers and readers. Every file starts with a `# schema=v1` line.

use std::collections::BTreeSet;

use serde::Deserialize;

use crate::analysis::{mann_whitney_u, RunSummary};
use crate::error::{Error, Result};
use crate::simulation::DecisionLogRow;
use crate::world::Color;

const SCHEMA: &str = "# schema=v1\n";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn runs_csv(runs: &[RunSummary]) -> String {
    let mut out = String::from(SCHEMA);
    out.push_str("mechanism,difficulty,dominant,setting,seed,consensus_time_s,consensus_opinion,final_accuracy,msgs_delivered\n");
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.mechanism,
            r.difficulty,
            r.dominant,
            r.setting,
            r.seed,
            opt(r.consensus_time_s),
            opt(r.consensus_opinion),
            r.final_accuracy,
            r.msgs_delivered
        ));
    }
    out
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn parse_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Deserialize)]
struct RunRow {
    mechanism: String,
    difficulty: f64,
    dominant: String,
    setting: usize,
    seed: u64,
    consensus_time_s: Option<f64>,
    consensus_opinion: Option<String>,
    final_accuracy: f64,
    msgs_delivered: u64,
}

pub fn parse_runs_csv(text: &str) -> Result<Vec<RunSummary>> {
    reader(text)
        .deserialize::<RunRow>()
        .map(|row| {
            let row = row.map_err(parse_err)?;
            Ok(RunSummary {
                mechanism: row.mechanism,
                difficulty: row.difficulty,
                dominant: row.dominant.parse()?,
                setting: row.setting,
                seed: row.seed,
                consensus_time_s: row.consensus_time_s,
                consensus_opinion: row
                    .consensus_opinion
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse())
                    .transpose()?,
                final_accuracy: row.final_accuracy,
                msgs_delivered: row.msgs_delivered,
            })
        })
        .collect()
}

pub fn decisions_csv(rows: &[DecisionLogRow]) -> String {
    let mut out = String::from(SCHEMA);
    out.push_str("t,robot_id,w,l,g,o_prev,o_new\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.t,
            r.robot,
            r.w,
            r.l,
            r.g.bit(),
            r.o_prev.bit(),
            r.o_new.bit()
        ));
    }
    out
}

#[derive(Deserialize)]
struct DecisionRow {
    t: f64,
    robot_id: usize,
    w: f64,
    l: f64,
    g: u8,
    o_prev: u8,
    o_new: u8,
}

pub fn parse_decisions_csv(text: &str) -> Result<Vec<DecisionLogRow>> {
    reader(text)
        .deserialize::<DecisionRow>()
        .map(|row| {
            let r = row.map_err(parse_err)?;
            Ok(DecisionLogRow {
                t: r.t,
                robot: r.robot_id,
                w: r.w,
                l: r.l,
                g: Color::from_bit(r.g != 0),
                o_prev: Color::from_bit(r.o_prev != 0),
                o_new: Color::from_bit(r.o_new != 0),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub pair: String,
    pub u: f64,
    pub p: f64,
}

/// Mann-Whitney U on consensus times for every mechanism pair within each
/// (difficulty, dominant) condition. Conditions where either side never
/// reached consensus are skipped.
pub fn stats_csv(runs: &[RunSummary]) -> Result<(Vec<StatsRow>, String)> {
    let mut mechanisms: Vec<&str> = Vec::new();
    for r in runs {
        if !mechanisms.contains(&r.mechanism.as_str()) {
            mechanisms.push(&r.mechanism);
        }
    }
    let conditions: BTreeSet<(u64, Color)> = runs
        .iter()
        .map(|r| (r.difficulty.to_bits(), r.dominant))
        .collect();

    let times = |m: &str, d: u64, dom: Color| -> Vec<f64> {
        runs.iter()
            .filter(|r| r.mechanism == m && r.difficulty.to_bits() == d && r.dominant == dom)
            .filter_map(|r| r.consensus_time_s)
            .collect()
    };

    let mut rows = Vec::new();
    for &(d, dom) in &conditions {
        for (i, a) in mechanisms.iter().enumerate() {
            for b in &mechanisms[i + 1..] {
                let (ta, tb) = (times(a, d, dom), times(b, d, dom));
                if ta.is_empty() || tb.is_empty() {
                    continue;
                }
                let r = mann_whitney_u(&ta, &tb)?;
                rows.push(StatsRow {
                    pair: format!("{a}-vs-{b}@{}/{dom}", f64::from_bits(d)),
                    u: r.u_a,
                    p: r.p,
                });
            }
        }
    }
    let mut out = String::from(SCHEMA);
    out.push_str("pair,U,p\n");
    for r in &rows {
        out.push_str(&format!("{},{},{}\n", r.pair, r.u, r.p));
    }
    Ok((rows, out))
}
