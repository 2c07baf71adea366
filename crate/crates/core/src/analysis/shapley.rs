//! Exact Shapley values over groups of input features.
//!
//! The value of a coalition is the interventional expectation: features in
//! the coalition are taken from the explained sample, all others from each
//! background row in turn, and the model output is averaged.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Genome;
use crate::mechanisms::{ann_output, INPUTS};
use crate::simulation::DecisionLogRow;

/// A named set of input indices acting as a single player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputGroup {
    pub name: String,
    pub inputs: Vec<usize>,
}

/// `{w+l}`, `{g}`, `{o_prev}` over inputs `[w, l, g, o_prev]`.
pub const DECISION_GROUPS: [(&str, &[usize]); 3] =
    [("w+l", &[0, 1]), ("g", &[2]), ("o_prev", &[3])];

pub fn decision_groups() -> Vec<InputGroup> {
    DECISION_GROUPS
        .iter()
        .map(|(name, idx)| InputGroup {
            name: (*name).to_string(),
            inputs: idx.to_vec(),
        })
        .collect()
}

fn check_partition(groups: &[InputGroup], width: usize) -> Result<()> {
    let mut seen = vec![false; width];
    for g in groups {
        for &i in &g.inputs {
            if i >= width || seen[i] {
                return Err(Error::Config(format!(
                    "groups must partition {width} inputs; index {i} is invalid or repeated"
                )));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Config("groups do not cover every input".into()));
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// One Shapley value per group, by full coalition enumeration.
pub fn shapley_grouped<F>(
    model: F,
    x: &[f64],
    background: &[Vec<f64>],
    groups: &[InputGroup],
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if background.is_empty() {
        return Err(Error::EmptyBackground);
    }
    check_partition(groups, x.len())?;
    let players = groups.len();
    let coalitions = 1usize << players;

    let mut value = vec![0.0; coalitions];
    let mut probe = vec![0.0; x.len()];
    for (mask, v) in value.iter_mut().enumerate() {
        let mut acc = 0.0;
        for row in background {
            probe.copy_from_slice(row);
            for (p, g) in groups.iter().enumerate() {
                if mask & (1 << p) != 0 {
                    for &i in &g.inputs {
                        probe[i] = x[i];
                    }
                }
            }
            acc += model(&probe);
        }
        *v = acc / background.len() as f64;
    }

    let total = factorial(players);
    let phi = (0..players)
        .map(|p| {
            let bit = 1 << p;
            (0..coalitions)
                .filter(|m| m & bit == 0)
                .map(|m| {
                    let s = m.count_ones() as usize;
                    let weight = factorial(s) * factorial(players - s - 1) / total;
                    weight * (value[m | bit] - value[m])
                })
                .sum()
        })
        .collect();
    Ok(phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributionConfig {
    pub background: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for AttributionConfig {
    fn default() -> Self {
        AttributionConfig {
            background: 100,
            samples: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    /// Mean absolute Shapley value per group.
    pub groups: Vec<(String, f64)>,
    pub samples: usize,
    pub background: usize,
}

impl AttributionReport {
    pub fn value(&self, group: &str) -> Option<f64> {
        self.groups.iter().find(|(g, _)| g == group).map(|(_, v)| *v)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema=v1\ngroup,mean_abs_shap\n");
        for (g, v) in &self.groups {
            out.push_str(&format!("{g},{v}\n"));
        }
        out
    }
}

pub fn row_inputs(row: &DecisionLogRow) -> Vec<f64> {
    vec![row.w, row.l, row.g.value(), row.o_prev.value()]
}

fn subsample<'a>(rows: &'a [DecisionLogRow], k: usize, rng: &mut ChaCha8Rng) -> Vec<&'a DecisionLogRow> {
    if rows.len() <= k {
        rows.iter().collect()
    } else {
        let mut idx = sample(rng, rows.len(), k).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| &rows[i]).collect()
    }
}

/// Mean |phi| per decision group of a network over logged decision inputs.
pub fn attribution_report(
    genome: &Genome,
    log: &[DecisionLogRow],
    config: &AttributionConfig,
) -> Result<AttributionReport> {
    if log.is_empty() {
        return Err(Error::EmptyBackground);
    }
    let groups = decision_groups();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let background: Vec<Vec<f64>> = subsample(log, config.background, &mut rng)
        .into_iter()
        .map(row_inputs)
        .collect();
    let evaluated = subsample(log, config.samples, &mut rng);

    let model = |v: &[f64]| {
        let mut x = [0.0; INPUTS];
        x.copy_from_slice(v);
        ann_output(genome, &x)
    };
    let mut sums = vec![0.0; groups.len()];
    for row in &evaluated {
        let phi = shapley_grouped(model, &row_inputs(row), &background, &groups)?;
        for (s, p) in sums.iter_mut().zip(phi) {
            *s += p.abs();
        }
    }
    Ok(AttributionReport {
        groups: groups
            .into_iter()
            .zip(sums)
            .map(|(g, s)| (g.name, s / evaluated.len() as f64))
            .collect(),
        samples: evaluated.len(),
        background: background.len(),
    })
}
