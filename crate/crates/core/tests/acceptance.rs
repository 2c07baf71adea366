//! Acceptance suite. Every test prints one `criterion N: PASS|FAIL` line to
//! stderr (uncaptured) and then asserts it.

use std::io::Write;
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swarm_cdm::analysis::{
    decision_groups, mann_whitney_u, mann_whitney_u_exact, mann_whitney_u_normal,
    shapley_grouped, two_proportion_test, RunSummary,
};
use swarm_cdm::comms::MessageQueue;
use swarm_cdm::evolution::{evolve_with_jobs, EvolutionConfig, Genome, GENOME_LEN};
use swarm_cdm::harness::{run_benchmark, BenchmarkOutput, ExperimentConfig};
use swarm_cdm::mechanisms::{ann_output, hc1, hc2, majority_rule, MechanismRegistry};
use swarm_cdm::world::Color;

const B: Color = Color::Black;
const W: Color = Color::White;

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "\ncriterion {criterion}: {verdict}  {detail}");
}

/// Heavy criteria run one at a time so their wall-clock budgets are honest.
fn heavy() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

// ---------------------------------------------------------------------------
// Mechanism oracles

/// Every queue content of length <= 4, in every arrival order.
fn all_queues() -> Vec<Vec<Color>> {
    let mut out = Vec::new();
    for n in 0..=4usize {
        for bits in 0..(1u32 << n) {
            out.push((0..n).map(|i| Color::from_bit(bits >> i & 1 == 1)).collect());
        }
    }
    out
}

fn oracle_majority(q: &[Color], own: Color) -> Color {
    let mut white = q.iter().filter(|&&c| c == W).count();
    let mut black = q.len() - white;
    match own {
        W => white += 1,
        B => black += 1,
    }
    if white > black {
        W
    } else if black > white {
        B
    } else {
        own
    }
}

/// 0.75 w + 0.25 g >= 0.5 with w = k/n, cross-multiplied by 4n.
fn oracle_hc1(q: &[Color], g: Color, own: Color) -> Color {
    if q.is_empty() {
        return own;
    }
    let n = q.len() as i64;
    let k = q.iter().filter(|&&c| c == W).count() as i64;
    let gi = i64::from(g == W);
    if 2 * (3 * k + gi * n) >= 4 * n {
        W
    } else {
        B
    }
}

fn oracle_hc2(q: &[Color], g: Color, own: Color) -> Color {
    if q.is_empty() {
        return own;
    }
    let n = q.len();
    let k = q.iter().filter(|&&c| c == W).count();
    if 4 * k >= 3 * n {
        W
    } else if 4 * k <= n {
        B
    } else {
        g
    }
}

#[test]
fn criterion_01_mechanism_unit_oracle() {
    let start = Instant::now();
    let mut cases = 0;
    let mut mismatches = 0;
    for q in all_queues() {
        let queue = MessageQueue::from_opinions(&q);
        for g in [B, W] {
            for own in [B, W] {
                cases += 1;
                mismatches += usize::from(majority_rule(&queue, own) != oracle_majority(&q, own));
                mismatches += usize::from(hc1(&queue, g, own) != oracle_hc1(&q, g, own));
                mismatches += usize::from(hc2(&queue, g, own) != oracle_hc2(&q, g, own));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && elapsed < Duration::from_secs(1);
    report(
        1,
        pass,
        &format!("{cases} cases x 3 mechanisms, {mismatches} mismatches, {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_hc1_hc2_relationship() {
    let mut full_disagreements = 0;
    let mut full_cases = 0;
    for q in all_queues().into_iter().filter(|q| q.len() == 4) {
        let queue = MessageQueue::from_opinions(&q);
        for g in [B, W] {
            for own in [B, W] {
                full_cases += 1;
                full_disagreements += usize::from(hc1(&queue, g, own) != hc2(&queue, g, own));
            }
        }
    }
    let two_thirds = MessageQueue::from_opinions(&[W, W, B]);
    let (h1, h2) = (hc1(&two_thirds, B, B), hc2(&two_thirds, B, B));
    let pass = full_disagreements == 0 && h1 == W && h2 == B;
    report(
        2,
        pass,
        &format!(
            "|Q|=4: {full_disagreements}/{full_cases} disagreements; |Q|=3 w=2/3 g=B: hc1={} hc2={}",
            h1.letter(),
            h2.letter()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Benchmarks

const TABLE_TIME_025: [(&str, f64, f64); 4] = [
    // (mechanism, Black-dominant, White-dominant)
    ("vm", 94.9, 94.9),
    ("mr", 69.5, 69.5),
    ("hc1", 52.9, 51.5),
    ("hc2", 50.6, 51.1),
];

fn benchmark(mechanisms: &[&str], difficulties: &[f64], seed: u64) -> BenchmarkOutput {
    let config = ExperimentConfig {
        mechanisms: mechanisms.iter().map(|m| m.to_string()).collect(),
        difficulties: difficulties.to_vec(),
        runs_per_condition: 200,
        horizon_s: 400.0,
        master_seed: seed,
        jobs: jobs(),
        ..ExperimentConfig::default()
    };
    run_benchmark(&config, &MechanismRegistry::default()).unwrap()
}

/// All four mechanisms at the easy and the hard setting.
fn core_benchmark() -> &'static (BenchmarkOutput, Duration) {
    static DATA: OnceLock<(BenchmarkOutput, Duration)> = OnceLock::new();
    DATA.get_or_init(|| {
        let start = Instant::now();
        let out = benchmark(&["vm", "mr", "hc1", "hc2"], &[0.25], 2024);
        let easy = start.elapsed();
        let hard = benchmark(&["vm", "mr", "hc1", "hc2"], &[0.82], 2025);
        let mut runs = out.runs;
        runs.extend(hard.runs);
        let report = swarm_cdm::analysis::aggregate(&runs);
        (BenchmarkOutput { report, runs }, easy)
    })
}

/// HC1 and HC2 at the two middle difficulties.
fn middle_benchmark() -> &'static BenchmarkOutput {
    static DATA: OnceLock<BenchmarkOutput> = OnceLock::new();
    DATA.get_or_init(|| benchmark(&["hc1", "hc2"], &[0.52, 0.67], 2026))
}

fn times(runs: &[RunSummary], mechanism: &str, difficulty: f64, dominant: Color) -> Vec<f64> {
    runs.iter()
        .filter(|r| r.mechanism == mechanism && r.difficulty == difficulty && r.dominant == dominant)
        .filter_map(|r| r.consensus_time_s)
        .collect()
}

fn exit(out: &BenchmarkOutput, mechanism: &str, difficulty: f64, dominant: Color) -> f64 {
    out.report.get(mechanism, difficulty, dominant).unwrap().exit_probability
}

fn hits(out: &BenchmarkOutput, mechanism: &str, difficulty: f64, dominant: Color) -> (usize, usize) {
    let c = out.report.get(mechanism, difficulty, dominant).unwrap();
    ((c.exit_probability * c.runs as f64).round() as usize, c.runs)
}

fn mean_time(out: &BenchmarkOutput, mechanism: &str, difficulty: f64, dominant: Color) -> f64 {
    out.report
        .get(mechanism, difficulty, dominant)
        .unwrap()
        .mean_consensus_time_s
        .unwrap_or(f64::INFINITY)
}

#[test]
fn criterion_03_easy_setting_exit_probability() {
    let _guard = heavy();
    let (out, easy_elapsed) = core_benchmark();
    let mut pass = *easy_elapsed < Duration::from_secs(600);
    let mut detail = String::new();
    for dominant in [W, B] {
        for m in ["vm", "hc1", "hc2"] {
            let e = exit(out, m, 0.25, dominant);
            pass &= e >= 0.99;
            detail += &format!("{m}/{}={:.1}% ", dominant.letter(), 100.0 * e);
        }
        let e = exit(out, "mr", 0.25, dominant);
        pass &= (0.93..1.0).contains(&e);
        detail += &format!("mr/{}={:.1}% ", dominant.letter(), 100.0 * e);
    }
    detail += &format!("({easy_elapsed:.1?} for 1600 runs)");
    report(3, pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_04_easy_setting_speed_ordering() {
    let _guard = heavy();
    let (out, _) = core_benchmark();
    let mut pass = true;
    let mut detail = String::new();
    for dominant in [W, B] {
        let t = |m: &str| mean_time(out, m, 0.25, dominant);
        let (vm, mr, h1, h2) = (t("vm"), t("mr"), t("hc1"), t("hc2"));
        pass &= h2 < h1 || (h2 - h1).abs() <= 0.1 * h1;
        pass &= h1 < mr && mr < vm;
        let mwu = mann_whitney_u(
            &times(&out.runs, "hc2", 0.25, dominant),
            &times(&out.runs, "vm", 0.25, dominant),
        )
        .unwrap();
        pass &= mwu.p < 0.05;
        for (m, black, white) in TABLE_TIME_025 {
            let reference = if dominant == W { white } else { black };
            pass &= (t(m) - reference).abs() <= 0.4 * reference;
        }
        detail += &format!(
            "[{}] hc2={h2:.1}s hc1={h1:.1}s mr={mr:.1}s vm={vm:.1}s p(hc2,vm)={:.2e} ",
            dominant.letter(),
            mwu.p
        );
    }
    report(4, pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_05_hard_setting_accuracy() {
    let _guard = heavy();
    let (out, _) = core_benchmark();
    let mut pass = true;
    let mut detail = String::new();
    for dominant in [W, B] {
        let e = |m: &str| exit(out, m, 0.82, dominant);
        let (h2, mr, vm) = (e("hc2"), e("mr"), e("vm"));
        pass &= h2 - mr >= 0.05 && h2 - vm >= 0.05;
        detail += &format!(
            "[{}] hc2={:.1}% mr={:.1}% vm={:.1}% ",
            dominant.letter(),
            100.0 * h2,
            100.0 * mr,
            100.0 * vm
        );
    }
    report(5, pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_06_color_symmetry() {
    let _guard = heavy();
    let (core, _) = core_benchmark();
    let middle = middle_benchmark();
    let source = |d: f64| if d == 0.25 || d == 0.82 { core } else { middle };
    let mut pass = true;
    let mut detail = String::new();
    for d in [0.25, 0.52, 0.67, 0.82] {
        let out = source(d);
        let (hw, nw) = hits(out, "hc2", d, W);
        let (hb, nb) = hits(out, "hc2", d, B);
        let p = two_proportion_test(hw, nw, hb, nb);
        pass &= p > 0.05;
        detail += &format!("hc2@{d}: p={p:.3} ");
    }
    for d in [0.52, 0.67, 0.82] {
        let out = source(d);
        let (ew, eb) = (exit(out, "hc1", d, W), exit(out, "hc1", d, B));
        pass &= ew > eb;
        detail += &format!("hc1@{d}: W={:.1}% B={:.1}% ", 100.0 * ew, 100.0 * eb);
    }
    report(6, pass, &detail);
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Evolution

#[test]
fn criterion_07_evolution_smoke() {
    let _guard = heavy();
    let config = EvolutionConfig::desk_scale();
    assert_eq!(
        (config.population, config.generations, config.patterns),
        (20, 30, 2)
    );
    assert_eq!((config.eval_horizon_s, config.difficulty), (100.0, 0.25));
    let start = Instant::now();
    let mut reached = 0;
    let mut monotone = true;
    let mut finals = Vec::new();
    for seed in 0..10 {
        let result = evolve_with_jobs(&config, seed, jobs()).unwrap();
        let trace: Vec<f64> = result.history.iter().map(|h| h.best_fitness).collect();
        monotone &= trace.windows(2).all(|w| w[1] >= w[0]);
        reached += usize::from(result.best_fitness >= 0.9);
        finals.push(result.best_fitness);
    }
    let elapsed = start.elapsed();
    let pass = reached >= 8 && monotone && elapsed < Duration::from_secs(15 * 60);
    report(
        7,
        pass,
        &format!(
            "{reached}/10 seeds >= 0.9, best-so-far monotone={monotone}, finals={finals:?}, {elapsed:.1?}"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Shapley

fn random_genome(rng: &mut ChaCha8Rng) -> Genome {
    Genome::from_weights((0..GENOME_LEN).map(|_| rng.random_range(-5.0..=5.0)).collect()).unwrap()
}

fn random_input(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(0..=4u32);
    let k = if n == 0 { 0 } else { rng.random_range(0..=n) };
    let w = if n == 0 { 0.0 } else { f64::from(k) / f64::from(n) };
    vec![
        w,
        f64::from(n) / 4.0,
        f64::from(u8::from(rng.random_bool(0.5))),
        f64::from(u8::from(rng.random_bool(0.5))),
    ]
}

/// Four-player game enumerated over all 2^4 coalitions, keeping only those in
/// which w (0) and l (1) are both present or both absent, with the pair
/// counted once in the ordering weights.
fn locked_pair_shapley(model: &dyn Fn(&[f64]) -> f64, x: &[f64], bg: &[Vec<f64>]) -> [f64; 3] {
    let value = |mask: u32| {
        bg.iter()
            .map(|row| {
                let probe: Vec<f64> = (0..4)
                    .map(|i| if mask >> i & 1 == 1 { x[i] } else { row[i] })
                    .collect();
                model(&probe)
            })
            .sum::<f64>()
            / bg.len() as f64
    };
    let locked = |mask: u32| (mask & 1) == ((mask >> 1) & 1);
    let player_bits = [0b0011u32, 0b0100, 0b1000];
    // weights for a 3-player game: |S| = 0 -> 1/3, 1 -> 1/6, 2 -> 1/3
    let weight = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0];
    let mut phi = [0.0; 3];
    for mask in (0..16u32).filter(|&m| locked(m)) {
        for (p, &bits) in player_bits.iter().enumerate() {
            if mask & bits != 0 {
                continue;
            }
            let size = player_bits
                .iter()
                .filter(|&&b| mask & b != 0)
                .count();
            phi[p] += weight[size] * (value(mask | bits) - value(mask));
        }
    }
    phi
}

#[test]
fn criterion_08_shapley_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let groups = decision_groups();

    let mut worst_efficiency: f64 = 0.0;
    let mut worst_locked: f64 = 0.0;
    for _ in 0..1000 {
        let genome = random_genome(&mut rng);
        let model = |v: &[f64]| ann_output(&genome, &[v[0], v[1], v[2], v[3]]);
        let bg: Vec<Vec<f64>> = (0..20).map(|_| random_input(&mut rng)).collect();
        let x = random_input(&mut rng);
        let phi = shapley_grouped(model, &x, &bg, &groups).unwrap();
        let base = bg.iter().map(|r| model(r)).sum::<f64>() / bg.len() as f64;
        worst_efficiency = worst_efficiency.max((phi.iter().sum::<f64>() - (model(&x) - base)).abs());
        let locked = locked_pair_shapley(&model, &x, &bg);
        for (a, b) in phi.iter().zip(locked) {
            worst_locked = worst_locked.max((a - b).abs());
        }
    }

    let mut worst_linear: f64 = 0.0;
    for _ in 0..100 {
        let c: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let linear = |v: &[f64]| c.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let bg: Vec<Vec<f64>> = (0..10).map(|_| random_input(&mut rng)).collect();
        let x = random_input(&mut rng);
        let mean = |i: usize| bg.iter().map(|r| r[i]).sum::<f64>() / bg.len() as f64;
        let expected = [
            c[0] * (x[0] - mean(0)) + c[1] * (x[1] - mean(1)),
            c[2] * (x[2] - mean(2)),
            c[3] * (x[3] - mean(3)),
        ];
        let phi = shapley_grouped(linear, &x, &bg, &groups).unwrap();
        for (a, b) in phi.iter().zip(expected) {
            worst_linear = worst_linear.max((a - b).abs());
        }
    }

    // Network blind to g and o_prev: input weights 2, 3 of every hidden unit zeroed.
    let mut null_ok = true;
    for _ in 0..100 {
        let mut w = random_genome(&mut rng).weights().to_vec();
        for h in 0..3 {
            w[4 * h + 2] = 0.0;
            w[4 * h + 3] = 0.0;
        }
        let genome = Genome::from_weights(w).unwrap();
        let model = |v: &[f64]| ann_output(&genome, &[v[0], v[1], v[2], v[3]]);
        let bg: Vec<Vec<f64>> = (0..10).map(|_| random_input(&mut rng)).collect();
        let phi = shapley_grouped(model, &random_input(&mut rng), &bg, &groups).unwrap();
        null_ok &= phi[1] == 0.0 && phi[2] == 0.0;
    }

    let pass = worst_efficiency <= 1e-9 && worst_locked <= 1e-9 && worst_linear <= 1e-9 && null_ok;
    report(
        8,
        pass,
        &format!(
            "efficiency {worst_efficiency:.1e}, locked pair {worst_locked:.1e}, linear {worst_linear:.1e}, null players exact={null_ok}"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Statistics

/// Every split of the ranks 1..=na+nb into two groups, as tie-free samples.
fn splits(na: usize, nb: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = na + nb;
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == na)
        .map(|m| {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for i in 0..n {
                if m >> i & 1 == 1 {
                    a.push(i as f64 + 1.0);
                } else {
                    b.push(i as f64 + 1.0);
                }
            }
            (a, b)
        })
        .collect()
}

#[test]
fn criterion_09_mann_whitney() {
    let mut worst = (0.0f64, 0, 0);
    let mut pairs_over = 0;
    for na in 1..=8 {
        for nb in 1..=8 {
            // Distinct U values suffice: p depends on the sample only through U.
            let mut seen = std::collections::BTreeSet::new();
            let mut pair_worst: f64 = 0.0;
            for (a, b) in splits(na, nb) {
                let exact = mann_whitney_u_exact(&a, &b).unwrap();
                if !seen.insert(exact.u_a as u64) {
                    continue;
                }
                let approx = mann_whitney_u_normal(&a, &b).unwrap();
                pair_worst = pair_worst.max((exact.p - approx.p).abs());
            }
            pairs_over += usize::from(pair_worst > 0.02);
            if pair_worst > worst.0 {
                worst = (pair_worst, na, nb);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut identity_ok = true;
    for _ in 0..100_000 {
        let na = rng.random_range(1..=12);
        let nb = rng.random_range(1..=12);
        // Coarse values force frequent ties.
        let a: Vec<f64> = (0..na).map(|_| f64::from(rng.random_range(0..6u8))).collect();
        let b: Vec<f64> = (0..nb).map(|_| f64::from(rng.random_range(0..6u8))).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        identity_ok &= (r.u_a + r.u_b - (na * nb) as f64).abs() < 1e-9;
    }

    let pass = worst.0 <= 0.02 && identity_ok;
    report(
        9,
        pass,
        &format!(
            "normal vs exact: max |dp| = {:.3} at (n_a, n_b) = ({}, {}), {pairs_over}/64 size pairs over 0.02; U identity over 1e5 fuzzed inputs ok={identity_ok}",
            worst.0, worst.1, worst.2
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Determinism through the CLI

#[test]
fn criterion_10_parallelism_independent_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: usize| {
        let out = dir.path().join(format!("jobs{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_swarm-cdm"))
            .args([
                "benchmark",
                "--mechanism",
                "vm,mr,hc1,hc2",
                "--difficulty",
                "0.25,0.82",
                "--runs",
                "4",
                "--horizon-s",
                "200",
                "--seed",
                "77",
                "--jobs",
                &jobs.to_string(),
                "--out",
            ])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out.join("runs.csv")).unwrap()
    };
    let one = run(1);
    let eight = run(8);
    let pass = one == eight && !one.is_empty();
    report(
        10,
        pass,
        &format!("runs.csv with --jobs 1 and --jobs 8: {} bytes, identical={}", one.len(), one == eight),
    );
    assert!(pass);
}
