use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::seed::derive_seed;
use crate::analysis::{aggregate, BenchmarkReport, RunSummary};
use crate::error::{Error, Result};
use crate::mechanisms::{DecisionMechanism, MechanismRegistry, SharedMechanism};
use crate::simulation::{balanced_opinions, run_once, RunRecord, SimConfig};
use crate::world::{generate_pattern, Color, Difficulty, Opinion, TileGrid};

const SETTING_STREAM: u64 = 2;

/// A White-dominant floor and start opinions; its mirror is the Black-dominant twin.
#[derive(Debug, Clone)]
pub struct Setting {
    pub seed: u64,
    pub grid: TileGrid,
    pub opinions: Vec<Opinion>,
}

impl Setting {
    pub fn generate(difficulty: Difficulty, robots: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SETTING_STREAM);
        let grid = generate_pattern(difficulty, Color::White, &mut rng);
        let opinions = balanced_opinions(robots, &mut rng);
        Setting {
            seed,
            grid,
            opinions,
        }
    }

    /// Grid and opinions for the given dominant feature.
    pub fn oriented(&self, dominant: Color) -> (TileGrid, Vec<Opinion>) {
        match dominant {
            Color::White => (self.grid.clone(), self.opinions.clone()),
            Color::Black => (
                self.grid.mirror(),
                self.opinions.iter().map(|o| o.inverted()).collect(),
            ),
        }
    }
}

/// Runs one setting in one orientation; both orientations share the seed and
/// therefore the start poses and dynamics randomness.
pub fn run_setting(
    sim: &SimConfig,
    setting: &Setting,
    dominant: Color,
    mechanism: &dyn DecisionMechanism,
) -> Result<RunRecord> {
    let (grid, opinions) = setting.oriented(dominant);
    run_once(sim, &grid, &opinions, mechanism, setting.seed)
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutput {
    pub report: BenchmarkReport,
    pub runs: Vec<RunSummary>,
}

struct Job {
    mechanism: usize,
    difficulty_index: usize,
    setting: usize,
    dominant: Color,
}

/// Every mechanism on `runs_per_condition` settings per difficulty, each
/// setting run White-dominant and mirrored Black-dominant.
///
/// Output order is fixed by (mechanism, difficulty, setting, dominant) and is
/// independent of the number of worker threads.
pub fn run_benchmark(
    config: &ExperimentConfig,
    registry: &MechanismRegistry,
) -> Result<BenchmarkOutput> {
    config.validate()?;
    let mechanisms: Vec<SharedMechanism> = config
        .mechanisms
        .iter()
        .map(|m| registry.resolve(m))
        .collect::<Result<_>>()?;
    let difficulties: Vec<Difficulty> = config
        .difficulties
        .iter()
        .map(|&d| Difficulty::new(d))
        .collect::<Result<_>>()?;
    let sim = config.sim_config();

    let mut jobs = Vec::new();
    for m in 0..mechanisms.len() {
        for d in 0..difficulties.len() {
            for s in 0..config.runs_per_condition {
                for dominant in [Color::White, Color::Black] {
                    jobs.push(Job {
                        mechanism: m,
                        difficulty_index: d,
                        setting: s,
                        dominant,
                    });
                }
            }
        }
    }

    let execute = |job: &Job| -> Result<RunSummary> {
        let difficulty = difficulties[job.difficulty_index];
        let seed = derive_seed(config.master_seed, job.difficulty_index as u64, job.setting as u64);
        let setting = Setting::generate(difficulty, config.robots, seed);
        let mechanism = &mechanisms[job.mechanism];
        let rec = run_setting(&sim, &setting, job.dominant, mechanism.as_ref())?;
        Ok(RunSummary {
            mechanism: config.mechanisms[job.mechanism].clone(),
            difficulty: difficulty.value(),
            dominant: job.dominant,
            setting: job.setting,
            seed,
            consensus_time_s: rec.consensus_time,
            consensus_opinion: rec.consensus_opinion,
            final_accuracy: rec.final_accuracy(),
            msgs_delivered: rec.msgs_delivered,
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let runs: Vec<RunSummary> =
        pool.install(|| jobs.par_iter().map(execute).collect::<Result<_>>())?;

    Ok(BenchmarkOutput {
        report: aggregate(&runs),
        runs,
    })
}
