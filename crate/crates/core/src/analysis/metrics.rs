use serde::{Deserialize, Serialize};

use crate::world::{Color, Opinion};

/// First tick at which every opinion agrees; trace index k is time `k * dt`.
pub fn consensus_time(trace: &[Vec<Opinion>], dt: f64) -> Option<(f64, Opinion)> {
    trace.iter().enumerate().find_map(|(k, ops)| {
        let first = *ops.first()?;
        ops.iter()
            .all(|&o| o == first)
            .then_some((k as f64 * dt, first))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Correct,
    WrongConsensus,
    NoConsensus,
}

/// One row of the per-run benchmark CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mechanism: String,
    pub difficulty: f64,
    pub dominant: Color,
    pub setting: usize,
    pub seed: u64,
    pub consensus_time_s: Option<f64>,
    pub consensus_opinion: Option<Opinion>,
    pub final_accuracy: f64,
    pub msgs_delivered: u64,
}

impl RunSummary {
    pub fn outcome(&self) -> Outcome {
        match self.consensus_opinion {
            Some(o) if o == self.dominant => Outcome::Correct,
            Some(_) => Outcome::WrongConsensus,
            None => Outcome::NoConsensus,
        }
    }
}

/// Share of runs whose first consensus is on `correct`.
pub fn exit_probability<'a, I>(consensus_opinions: I, correct: Color) -> f64
where
    I: IntoIterator<Item = &'a Option<Opinion>>,
{
    let mut total = 0usize;
    let mut hits = 0usize;
    for o in consensus_opinions {
        total += 1;
        if *o == Some(correct) {
            hits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub mechanism: String,
    pub difficulty: f64,
    pub dominant: Color,
    pub runs: usize,
    pub consensus_runs: usize,
    pub exit_probability: f64,
    /// Mean over consensus-reaching runs only.
    pub mean_consensus_time_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub conditions: Vec<ConditionSummary>,
}

impl BenchmarkReport {
    pub fn get(&self, mechanism: &str, difficulty: f64, dominant: Color) -> Option<&ConditionSummary> {
        self.conditions.iter().find(|c| {
            c.mechanism == mechanism && (c.difficulty - difficulty).abs() < 1e-9 && c.dominant == dominant
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "# schema=v1\nmechanism,difficulty,dominant,runs,consensus_runs,exit_probability,mean_consensus_time_s\n",
        );
        for c in &self.conditions {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.mechanism,
                c.difficulty,
                c.dominant,
                c.runs,
                c.consensus_runs,
                c.exit_probability,
                c.mean_consensus_time_s.map(|t| t.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}

/// Groups runs by (mechanism, difficulty, dominant) in first-seen order.
pub fn aggregate(runs: &[RunSummary]) -> BenchmarkReport {
    let mut keys: Vec<(String, f64, Color)> = Vec::new();
    for r in runs {
        let key = (r.mechanism.clone(), r.difficulty, r.dominant);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let conditions = keys
        .into_iter()
        .map(|(mechanism, difficulty, dominant)| {
            let group: Vec<&RunSummary> = runs
                .iter()
                .filter(|r| r.mechanism == mechanism && r.difficulty == difficulty && r.dominant == dominant)
                .collect();
            let times: Vec<f64> = group.iter().filter_map(|r| r.consensus_time_s).collect();
            let mean = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
            ConditionSummary {
                runs: group.len(),
                consensus_runs: times.len(),
                exit_probability: exit_probability(group.iter().map(|r| &r.consensus_opinion), dominant),
                mean_consensus_time_s: mean,
                mechanism,
                difficulty,
                dominant,
            }
        })
        .collect();
    BenchmarkReport { conditions }
}
