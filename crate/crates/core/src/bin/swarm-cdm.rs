use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swarm_cdm::analysis::{attribution_report, input_distribution, AttributionConfig, RunSummary};
use swarm_cdm::evolution::{evolve_with_jobs, EvolutionConfig, Genome};
use swarm_cdm::harness::{
    decisions_csv, derive_seed, parse_decisions_csv, parse_runs_csv, run_benchmark, runs_csv,
    stats_csv, ExperimentConfig, Setting,
};
use swarm_cdm::mechanisms::{AnnMechanism, MechanismRegistry};
use swarm_cdm::simulation::{balanced_opinions, run_once, SimConfig};
use swarm_cdm::world::{generate_pattern, Color, Difficulty, GridFile};
use swarm_cdm::{Error, Result};

#[derive(Parser)]
#[command(name = "swarm-cdm", version, about = "Collective perception benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a floor pattern file.
    GenEnv(GenEnvArgs),
    /// Run a single simulation and write its summary and decision log.
    Simulate(SimulateArgs),
    /// Run the benchmark protocol and write per-run and aggregate CSVs.
    Benchmark(BenchmarkArgs),
    /// Evolve a decision network.
    Evolve(EvolveArgs),
    /// Grouped Shapley attribution and input distributions for a genome.
    Shap(ShapArgs),
    /// Pairwise Mann-Whitney U tests on consensus times from a per-run CSV.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenEnvArgs {
    #[arg(long, default_value_t = 0.25)]
    difficulty: f64,
    #[arg(long, default_value = "W")]
    dominant: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "env.txt")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "hc2")]
    mechanism: String,
    #[arg(long, default_value_t = 0.25)]
    difficulty: f64,
    #[arg(long, default_value = "W")]
    dominant: String,
    /// Floor pattern file from `gen-env`; generated from the seed when absent.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, default_value_t = 400.0)]
    horizon_s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mechanism spec, repeatable or comma separated: vm, mr, hc1, hc2, ann:<file>.
    #[arg(long, value_delimiter = ',')]
    mechanism: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    difficulty: Vec<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    horizon_s: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    /// `desk` (20 genomes, 30 generations, 2 patterns, 100 s) or `full`.
    #[arg(long, default_value = "desk")]
    preset: String,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    patterns: Option<usize>,
    #[arg(long)]
    horizon_s: Option<f64>,
    /// Index of this evolutionary run; mixed into the seed.
    #[arg(long, default_value_t = 0)]
    run_index: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ShapArgs {
    #[arg(long)]
    genome: PathBuf,
    /// Decision log CSV; when absent the genome is simulated to produce one.
    #[arg(long)]
    decisions: Option<PathBuf>,
    #[arg(long, default_value_t = 0.25)]
    difficulty: f64,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 200.0)]
    horizon_s: f64,
    #[arg(long, default_value_t = 100)]
    background: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Per-run CSV written by `benchmark`.
    #[arg(long)]
    runs_csv: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn gen_env(args: GenEnvArgs) -> Result<()> {
    let difficulty = Difficulty::new(args.difficulty)?;
    let dominant: Color = args.dominant.parse()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let file = GridFile {
        grid: generate_pattern(difficulty, dominant, &mut rng),
        difficulty,
        dominant,
        seed: args.seed,
    };
    write(&args.out, &file.to_text())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mechanism = MechanismRegistry::default().resolve(&args.mechanism)?;
    let config = SimConfig {
        horizon_s: args.horizon_s,
        log_decisions: true,
        ..SimConfig::default()
    };
    let mut dominant: Color = args.dominant.parse()?;
    let mut difficulty = Difficulty::new(args.difficulty)?;
    let (grid, opinions) = match &args.grid {
        Some(path) => {
            let file = GridFile::parse(&read(path)?)?;
            dominant = file.dominant;
            difficulty = file.difficulty;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let ops = balanced_opinions(config.robots, &mut rng);
            (file.grid, ops)
        }
        None => Setting::generate(difficulty, config.robots, args.seed).oriented(dominant),
    };
    let rec = run_once(&config, &grid, &opinions, mechanism.as_ref(), args.seed)?;
    let summary = RunSummary {
        mechanism: args.mechanism.clone(),
        difficulty: difficulty.value(),
        dominant,
        setting: 0,
        seed: args.seed,
        consensus_time_s: rec.consensus_time,
        consensus_opinion: rec.consensus_opinion,
        final_accuracy: rec.final_accuracy(),
        msgs_delivered: rec.msgs_delivered,
    };
    write(&args.out.join("run.csv"), &runs_csv(&[summary]))?;
    write(&args.out.join("decisions.csv"), &decisions_csv(&rec.decisions))?;
    match rec.consensus_time {
        Some(t) => println!(
            "consensus on {} at {t:.1} s",
            rec.consensus_opinion.expect("set with time")
        ),
        None => println!("no consensus within {} s", args.horizon_s),
    }
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if !args.mechanism.is_empty() {
        config.mechanisms = args.mechanism;
    }
    if !args.difficulty.is_empty() {
        config.difficulties = args.difficulty;
    }
    if let Some(r) = args.runs {
        config.runs_per_condition = r;
    }
    if let Some(h) = args.horizon_s {
        config.horizon_s = h;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(j) = args.jobs {
        config.jobs = j;
    }
    if let Some(o) = args.out {
        config.out = o;
    }
    let output = run_benchmark(&config, &MechanismRegistry::default())?;
    write(&config.out.join("runs.csv"), &runs_csv(&output.runs))?;
    let table = output.report.to_csv();
    write(&config.out.join("benchmark.csv"), &table)?;
    print!("{table}");
    Ok(())
}

fn evolve(args: EvolveArgs) -> Result<()> {
    let mut config = match args.preset.as_str() {
        "desk" => EvolutionConfig::desk_scale(),
        "full" => EvolutionConfig::default(),
        other => return Err(Error::Config(format!("unknown preset {other:?}"))),
    };
    if let Some(p) = args.population {
        config.population = p;
    }
    if let Some(g) = args.generations {
        config.generations = g;
    }
    if let Some(p) = args.patterns {
        config.patterns = p;
    }
    if let Some(h) = args.horizon_s {
        config.eval_horizon_s = h;
    }
    let seed = derive_seed(args.seed, args.run_index, 0);
    let result = evolve_with_jobs(&config, seed, args.jobs)?;
    let idx = args.run_index;
    write(&args.out.join(format!("genome_{idx}.txt")), &result.best.to_text())?;
    write(&args.out.join(format!("history_{idx}.csv")), &result.history_csv())?;
    println!("best fitness {}", result.best_fitness);
    Ok(())
}

fn shap(args: ShapArgs) -> Result<()> {
    let genome = Genome::load(&args.genome)?;
    let log = match &args.decisions {
        Some(path) => parse_decisions_csv(&read(path)?)?,
        None => {
            let mechanism = AnnMechanism::new(genome.clone(), "ann")?;
            let config = SimConfig {
                horizon_s: args.horizon_s,
                log_decisions: true,
                ..SimConfig::default()
            };
            let difficulty = Difficulty::new(args.difficulty)?;
            let mut rows = Vec::new();
            for run in 0..args.runs {
                let seed = derive_seed(args.seed, 0, run as u64);
                let setting = Setting::generate(difficulty, config.robots, seed);
                for dominant in [Color::White, Color::Black] {
                    let (grid, ops) = setting.oriented(dominant);
                    rows.extend(run_once(&config, &grid, &ops, &mechanism, seed)?.decisions);
                }
            }
            rows
        }
    };
    let report = attribution_report(
        &genome,
        &log,
        &AttributionConfig {
            background: args.background,
            samples: args.samples,
            seed: args.seed,
        },
    )?;
    write(&args.out.join("attribution.csv"), &report.to_csv())?;
    write(&args.out.join("inputs.csv"), &input_distribution(&log)?.to_csv())?;
    print!("{}", report.to_csv());
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    let runs = parse_runs_csv(&read(&args.runs_csv)?)?;
    let (_, text) = stats_csv(&runs)?;
    write(&args.out.join("stats.csv"), &text)?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenEnv(a) => gen_env(a),
        Command::Simulate(a) => simulate(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Evolve(a) => evolve(a),
        Command::Shap(a) => shap(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
