//! Neuroevolution of the 4-3-1 decision network.

use std::fs;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::derive_seed;
use crate::mechanisms::{AnnMechanism, HIDDEN, INPUTS};
use crate::simulation::{balanced_opinions, run_once, SimConfig};
use crate::world::{generate_pattern, Color, Difficulty, Opinion, TileGrid};

pub const GENOME_LEN: usize = HIDDEN * INPUTS + HIDDEN + HIDDEN + 1;
pub const GENE_BOUND: f64 = 5.0;
const GENOME_HEADER: &str = "ann-genome v1 n=19";

/// Selection weight floor so an all-zero population selects uniformly.
pub const SELECTION_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    weights: Vec<f64>,
    pub age: u32,
}

impl Genome {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() != GENOME_LEN {
            return Err(Error::Config(format!(
                "genome needs {GENOME_LEN} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.abs() <= GENE_BOUND)) {
            return Err(Error::Config(format!(
                "gene {w} outside [-{GENE_BOUND}, {GENE_BOUND}]"
            )));
        }
        Ok(Genome { weights, age: 0 })
    }

    pub fn random<R: Rng + ?Sized>(init_range: f64, rng: &mut R) -> Self {
        Genome {
            weights: (0..GENOME_LEN)
                .map(|_| rng.random_range(-init_range..=init_range))
                .collect(),
            age: 0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_text(&self) -> String {
        let values: Vec<String> = self.weights.iter().map(f64::to_string).collect();
        format!("{GENOME_HEADER}\n{}\n", values.join(" "))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some(GENOME_HEADER) => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header {GENOME_HEADER:?}, found {other:?}"
                )))
            }
        }
        let weights = lines
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad weight {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Genome::from_weights(weights)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Genome::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub elitism: usize,
    /// Random patterns per evaluation; each is also run mirrored.
    pub patterns: usize,
    pub eval_horizon_s: f64,
    pub difficulty: f64,
    pub robots: usize,
    pub init_range: f64,
    /// Draw fresh evaluation patterns every generation.
    pub resample_patterns: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population: 50,
            generations: 600,
            mutation_rate: 0.2,
            mutation_sigma: 0.5,
            elitism: 1,
            patterns: 3,
            eval_horizon_s: 200.0,
            difficulty: 0.25,
            robots: 20,
            init_range: 1.0,
            resample_patterns: true,
        }
    }
}

impl EvolutionConfig {
    /// Small preset that finishes in seconds: 20 genomes, 30 generations,
    /// 2 patterns plus inverses, 100 s evaluations.
    pub fn desk_scale() -> Self {
        EvolutionConfig {
            population: 20,
            generations: 30,
            patterns: 2,
            eval_horizon_s: 100.0,
            ..EvolutionConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("population must be at least 2".into()));
        }
        if self.elitism >= self.population {
            return Err(Error::Config("elitism must be below the population size".into()));
        }
        if self.patterns == 0 || self.generations == 0 {
            return Err(Error::Config("need at least one pattern and one generation".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Config("mutation rate must lie in [0, 1]".into()));
        }
        Difficulty::new(self.difficulty)?;
        self.sim_config().validate()
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            robots: self.robots,
            horizon_s: self.eval_horizon_s,
            ..SimConfig::default()
        }
    }
}

/// Share of robots holding the dominant feature in the final step.
pub fn fitness_final_step(final_opinions: &[Opinion], dominant: Color) -> f64 {
    if final_opinions.is_empty() {
        return 0.0;
    }
    let correct = final_opinions.iter().filter(|&&o| o == dominant).count();
    correct as f64 / final_opinions.len() as f64
}

/// Fitness of every evaluation run of a genome, pattern by pattern then its mirror.
pub fn evaluation_scores(
    genome: &Genome,
    patterns: &[TileGrid],
    config: &EvolutionConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    let sim = config.sim_config();
    let mechanism = AnnMechanism::new(genome.clone(), "ann")?;
    let mut scores = Vec::with_capacity(2 * patterns.len());
    for (k, grid) in patterns.iter().enumerate() {
        let run_seed = derive_seed(seed, k as u64, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
        let opinions = balanced_opinions(config.robots, &mut rng);
        let mirrored_opinions: Vec<Opinion> = opinions.iter().map(|o| o.inverted()).collect();
        let mirrored = grid.mirror();
        for (g, ops) in [(grid, &opinions), (&mirrored, &mirrored_opinions)] {
            let dominant = g
                .dominant()
                .ok_or_else(|| Error::Config("evaluation pattern has no dominant color".into()))?;
            let rec = run_once(&sim, g, ops, &mechanism, run_seed)?;
            scores.push(fitness_final_step(&rec.final_opinions, dominant));
        }
    }
    Ok(scores)
}

/// Minimum fitness over all patterns and their mirrors.
pub fn genome_fitness(
    genome: &Genome,
    patterns: &[TileGrid],
    config: &EvolutionConfig,
    seed: u64,
) -> Result<f64> {
    Ok(aggregate_min(&evaluation_scores(genome, patterns, config, seed)?))
}

pub fn aggregate_min(scores: &[f64]) -> f64 {
    scores.iter().copied().fold(f64::INFINITY, f64::min).min(1.0).max(0.0)
}

pub fn mutate<R: Rng + ?Sized>(genome: &Genome, rate: f64, sigma: f64, rng: &mut R) -> Genome {
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    let weights = genome
        .weights
        .iter()
        .map(|&w| {
            if rng.random_bool(rate) {
                (w + noise.sample(rng)).clamp(-GENE_BOUND, GENE_BOUND)
            } else {
                w
            }
        })
        .collect();
    Genome { weights, age: 0 }
}

/// Index draws proportional to `fitness + epsilon`.
pub fn select_parents<R: Rng + ?Sized>(fitness: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let weights: Vec<f64> = fitness.iter().map(|f| f + SELECTION_EPSILON).collect();
    let dist = WeightedIndex::new(&weights).expect("positive weights");
    (0..count).map(|_| dist.sample(rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub median_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub best: Genome,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
}

impl EvolutionResult {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("# schema=v1\ngeneration,best_fitness,median_fitness\n");
        for h in &self.history {
            out.push_str(&format!(
                "{},{},{}\n",
                h.generation, h.best_fitness, h.median_fitness
            ));
        }
        out
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// Seed-derivation tags; evaluation seeds use the individual index directly.
const PATTERN_TAG: u64 = u64::MAX;
const SELECTION_TAG: u64 = u64::MAX - 1;
const INIT_TAG: u64 = u64::MAX - 2;

fn evaluation_patterns(config: &EvolutionConfig, master: u64, generation: usize) -> Vec<TileGrid> {
    let cadence = if config.resample_patterns {
        generation as u64
    } else {
        0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, cadence, PATTERN_TAG));
    let d = Difficulty::new(config.difficulty).expect("validated difficulty");
    (0..config.patterns)
        .map(|_| generate_pattern(d, Color::White, &mut rng))
        .collect()
}

/// Generational EA: fitness-proportionate parents, mutation only, elites keep
/// their recorded fitness, every other individual is replaced each generation.
///
/// Evaluations within a generation run in parallel; each uses a seed derived
/// from (generation, individual) so results do not depend on scheduling.
pub fn evolve(config: &EvolutionConfig, master_seed: u64) -> Result<EvolutionResult> {
    config.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, 0, INIT_TAG));
    let mut population: Vec<Genome> = (0..config.population)
        .map(|_| Genome::random(config.init_range, &mut init_rng))
        .collect();
    let mut recorded: Vec<Option<f64>> = vec![None; config.population];
    let mut history = Vec::with_capacity(config.generations);

    for generation in 0..config.generations {
        let patterns = evaluation_patterns(config, master_seed, generation);
        let fitness: Vec<f64> = population
            .par_iter()
            .zip(recorded.par_iter())
            .enumerate()
            .map(|(idx, (genome, known))| match known {
                Some(f) => Ok(*f),
                None => {
                    let seed = derive_seed(master_seed, generation as u64, idx as u64);
                    genome_fitness(genome, &patterns, config, seed)
                }
            })
            .collect::<Result<_>>()?;

        let mut order: Vec<usize> = (0..fitness.len()).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        history.push(GenerationStats {
            generation,
            best_fitness: fitness[order[0]],
            median_fitness: median(&fitness),
        });

        if generation + 1 == config.generations {
            let best = population[order[0]].clone();
            return Ok(EvolutionResult {
                best,
                best_fitness: fitness[order[0]],
                history,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            master_seed,
            generation as u64,
            SELECTION_TAG,
        ));
        let mut next = Vec::with_capacity(config.population);
        let mut next_recorded = Vec::with_capacity(config.population);
        for &e in order.iter().take(config.elitism) {
            let mut elite = population[e].clone();
            elite.age += 1;
            next.push(elite);
            next_recorded.push(Some(fitness[e]));
        }
        let parents = select_parents(&fitness, config.population - config.elitism, &mut rng);
        for p in parents {
            next.push(mutate(
                &population[p],
                config.mutation_rate,
                config.mutation_sigma,
                &mut rng,
            ));
            next_recorded.push(None);
        }
        population = next;
        recorded = next_recorded;
    }
    unreachable!("generations >= 1 is validated")
}

/// Runs `evolve` on a local thread pool of `jobs` workers.
pub fn evolve_with_jobs(
    config: &EvolutionConfig,
    master_seed: u64,
    jobs: usize,
) -> Result<EvolutionResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| evolve(config, master_seed))
}
