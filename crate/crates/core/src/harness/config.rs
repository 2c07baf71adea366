use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulation::SimConfig;
use crate::world::Difficulty;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mechanisms: Vec<String>,
    pub difficulties: Vec<f64>,
    pub runs_per_condition: usize,
    pub horizon_s: f64,
    pub robots: usize,
    pub dt: f64,
    pub master_seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mechanisms: vec!["vm".into(), "mr".into(), "hc1".into(), "hc2".into()],
            difficulties: Difficulty::BENCHMARK.to_vec(),
            runs_per_condition: 1000,
            horizon_s: 400.0,
            robots: 20,
            dt: 0.1,
            master_seed: 0,
            out: PathBuf::from("out"),
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            robots: self.robots,
            horizon_s: self.horizon_s,
            dt: self.dt,
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_condition == 0 {
            return Err(Error::Config("runs_per_condition must be at least 1".into()));
        }
        if self.mechanisms.is_empty() || self.difficulties.is_empty() {
            return Err(Error::Config("need at least one mechanism and one difficulty".into()));
        }
        if self.robots % 2 != 0 {
            return Err(Error::Config("robot count must be even for a balanced start".into()));
        }
        for &d in &self.difficulties {
            Difficulty::new(d)?;
        }
        self.sim_config().validate()
    }
}
