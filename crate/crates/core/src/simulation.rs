//! One run of N robots: motion, sensing, messaging and decisions at a fixed tick.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::comms::{deliver_broadcasts, MessageQueue, Radio};
use crate::error::{Error, Result};
use crate::mechanisms::DecisionMechanism;
use crate::robot::{
    collides, integrate_pose, motion_step, sense_proximity, MotionState, Pose, AXLE_LENGTH,
    BODY_RADIUS,
};
use crate::strategy::{DecisionState, PfsmParams};
use crate::world::{Color, Opinion, TileGrid, ARENA_SIZE};

pub const PLACEMENT_ATTEMPTS: usize = 10_000;
pub const MIN_START_SEPARATION: f64 = 2.0 * BODY_RADIUS;

const POSE_STREAM: u64 = 0;
const DYNAMICS_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub robots: usize,
    pub horizon_s: f64,
    pub dt: f64,
    pub mean_explore_s: f64,
    pub send_scale_s: f64,
    pub receive_s: f64,
    /// Keep one row per decision in the run record.
    pub log_decisions: bool,
    /// Keep the per-tick opinion trace in the run record.
    pub record_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            robots: 20,
            horizon_s: 400.0,
            dt: 0.1,
            mean_explore_s: 10.0,
            send_scale_s: 10.0,
            receive_s: 3.0,
            log_decisions: false,
            record_trace: false,
        }
    }
}

impl SimConfig {
    pub fn pfsm(&self) -> PfsmParams {
        PfsmParams {
            mean_explore_s: self.mean_explore_s,
            send_scale_s: self.send_scale_s,
            receive_s: self.receive_s,
            dt: self.dt,
        }
    }

    pub fn ticks(&self) -> u64 {
        (self.horizon_s / self.dt).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.robots < 2 {
            return Err(Error::Config("at least two robots are required".into()));
        }
        if !(self.dt > 0.0) || (1.0 / self.dt - (1.0 / self.dt).round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "dt must divide one second evenly, got {}",
                self.dt
            )));
        }
        let ticks = self.horizon_s / self.dt;
        if !(self.horizon_s > 0.0) || (ticks - ticks.round()).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "horizon {} s is not a positive multiple of dt {}",
                self.horizon_s, self.dt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionLogRow {
    pub t: f64,
    pub robot: usize,
    pub w: f64,
    pub l: f64,
    pub g: Color,
    pub o_prev: Opinion,
    pub o_new: Opinion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub mechanism: String,
    pub difficulty: f64,
    pub dominant: Option<Color>,
    pub ticks: u64,
    pub consensus_time: Option<f64>,
    pub consensus_opinion: Option<Opinion>,
    pub final_opinions: Vec<Opinion>,
    pub initial_poses: Vec<Pose>,
    pub msgs_delivered: u64,
    pub decisions: Vec<DecisionLogRow>,
    pub trace: Vec<Vec<Opinion>>,
}

impl RunRecord {
    pub fn correct(&self) -> bool {
        self.consensus_opinion.is_some() && self.consensus_opinion == self.dominant
    }

    /// Fraction of robots ending on the dominant feature.
    pub fn final_accuracy(&self) -> f64 {
        match self.dominant {
            Some(d) => crate::evolution::fitness_final_step(&self.final_opinions, d),
            None => 0.0,
        }
    }
}

/// Collision-free uniform start poses.
pub fn place_robots<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Pose>> {
    let lo = BODY_RADIUS;
    let hi = ARENA_SIZE - BODY_RADIUS;
    let mut poses: Vec<Pose> = Vec::with_capacity(n);
    let mut attempts = 0;
    while poses.len() < n {
        if attempts == PLACEMENT_ATTEMPTS {
            return Err(Error::Placement {
                robots: n,
                attempts,
            });
        }
        attempts += 1;
        let p = Pose::new(
            rng.random_range(lo..=hi),
            rng.random_range(lo..=hi),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        if poses.iter().all(|q| p.distance(q) >= MIN_START_SEPARATION) {
            poses.push(p);
        }
    }
    Ok(poses)
}

/// Start poses for a run seed; mirrored runs sharing the seed share the poses.
pub fn start_poses(n: usize, seed: u64) -> Result<Vec<Pose>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POSE_STREAM);
    place_robots(n, &mut rng)
}

/// Tracks the first tick at which all opinions agree.
#[derive(Debug, Clone, Default)]
struct ConsensusTracker {
    first: Option<(u64, Opinion)>,
}

impl ConsensusTracker {
    fn observe(&mut self, tick: u64, opinions: &[Opinion]) {
        if self.first.is_some() {
            return;
        }
        if let Some(&o) = opinions.first() {
            if opinions.iter().all(|&x| x == o) {
                self.first = Some((tick, o));
            }
        }
    }
}

/// Live state of one run, advanced tick by tick.
pub struct Swarm<'a> {
    config: &'a SimConfig,
    grid: &'a TileGrid,
    mechanism: &'a dyn DecisionMechanism,
    params: PfsmParams,
    rng: ChaCha8Rng,
    tick: u64,
    poses: Vec<Pose>,
    opinions: Vec<Opinion>,
    motion: Vec<MotionState>,
    decision: Vec<DecisionState>,
    queues: Vec<MessageQueue>,
    radios: Vec<Radio>,
    ground: Vec<Color>,
    msgs_delivered: u64,
    decisions: Vec<DecisionLogRow>,
}

impl<'a> Swarm<'a> {
    /// Poses come from the seed's pose stream, all other randomness from its
    /// dynamics stream, so a run and its mirror see identical randomness.
    pub fn new(
        config: &'a SimConfig,
        grid: &'a TileGrid,
        initial_opinions: &[Opinion],
        mechanism: &'a dyn DecisionMechanism,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if initial_opinions.len() != config.robots {
            return Err(Error::Config(format!(
                "{} initial opinions for {} robots",
                initial_opinions.len(),
                config.robots
            )));
        }
        let n = config.robots;
        let params = config.pfsm();
        let poses = start_poses(n, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(DYNAMICS_STREAM);
        let motion = (0..n).map(|_| MotionState::new(&mut rng)).collect();
        let decision = (0..n).map(|_| DecisionState::new(&params, &mut rng)).collect();
        Ok(Swarm {
            config,
            grid,
            mechanism,
            params,
            rng,
            tick: 0,
            poses,
            opinions: initial_opinions.to_vec(),
            motion,
            decision,
            queues: vec![MessageQueue::new(); n],
            radios: vec![Radio::Idle; n],
            ground: vec![Color::Black; n],
            msgs_delivered: 0,
            decisions: Vec::new(),
        })
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn opinions(&self) -> &[Opinion] {
        &self.opinions
    }

    pub fn motion_states(&self) -> &[MotionState] {
        &self.motion
    }

    pub fn decision_states(&self) -> &[DecisionState] {
        &self.decision
    }

    /// Sense, exchange messages, run the PFSMs, then move. Returns deliveries made.
    pub fn step(&mut self) -> Result<usize> {
        let n = self.config.robots;
        self.tick += 1;
        let t = self.tick as f64 * self.config.dt;
        for (g, p) in self.ground.iter_mut().zip(&self.poses) {
            *g = self.grid.ground_color(p.x, p.y)?;
        }
        for (r, d) in self.radios.iter_mut().zip(&self.decision) {
            *r = d.radio(&self.params);
        }
        let delivered =
            deliver_broadcasts(&self.poses, &self.opinions, &self.radios, &mut self.queues);
        self.msgs_delivered += delivered as u64;

        for i in 0..n {
            let (o, event) = self.decision[i].step(
                &mut self.queues[i],
                self.ground[i],
                self.opinions[i],
                self.mechanism,
                &self.params,
                &mut self.rng,
            );
            self.opinions[i] = o;
            if let (true, Some(ev)) = (self.config.log_decisions, event) {
                self.decisions.push(DecisionLogRow {
                    t,
                    robot: i,
                    w: ev.w,
                    l: ev.l,
                    g: ev.ground,
                    o_prev: ev.previous,
                    o_new: ev.new,
                });
            }
        }

        for i in 0..n {
            let readings = sense_proximity(&self.poses[i], others(&self.poses, i));
            let (next, speeds) =
                motion_step(self.motion[i], &readings, self.config.dt, &mut self.rng);
            self.motion[i] = next;
            let current = self.poses[i];
            let proposed =
                integrate_pose(current, speeds.left, speeds.right, self.config.dt, AXLE_LENGTH)?;
            self.poses[i] = if collides(&proposed, others(&self.poses, i)) {
                Pose::new(current.x, current.y, proposed.heading)
            } else {
                proposed
            };
        }
        Ok(delivered)
    }
}

fn others(poses: &[Pose], me: usize) -> impl Iterator<Item = &Pose> {
    poses
        .iter()
        .enumerate()
        .filter(move |&(j, _)| j != me)
        .map(|(_, p)| p)
}

/// Simulates one run from `seed` to the horizon.
pub fn run_once(
    config: &SimConfig,
    grid: &TileGrid,
    initial_opinions: &[Opinion],
    mechanism: &dyn DecisionMechanism,
    seed: u64,
) -> Result<RunRecord> {
    let mut swarm = Swarm::new(config, grid, initial_opinions, mechanism, seed)?;
    let initial_poses = swarm.poses.clone();

    let mut tracker = ConsensusTracker::default();
    tracker.observe(0, &swarm.opinions);
    let mut trace = Vec::new();
    if config.record_trace {
        trace.push(swarm.opinions.clone());
    }
    let ticks = config.ticks();
    for _ in 0..ticks {
        swarm.step()?;
        tracker.observe(swarm.tick, &swarm.opinions);
        if config.record_trace {
            trace.push(swarm.opinions.clone());
        }
    }

    let (consensus_time, consensus_opinion) = match tracker.first {
        Some((tick, o)) => (Some(tick as f64 * config.dt), Some(o)),
        None => (None, None),
    };
    Ok(RunRecord {
        seed,
        mechanism: mechanism.name().to_string(),
        difficulty: grid.difficulty().map(|d| d.value()).unwrap_or(f64::NAN),
        dominant: grid.dominant(),
        ticks,
        consensus_time,
        consensus_opinion,
        final_opinions: swarm.opinions,
        initial_poses,
        msgs_delivered: swarm.msgs_delivered,
        decisions: swarm.decisions,
        trace,
    })
}

/// Ten White and ten Black opinions (for N = 20) in a seeded random order.
pub fn balanced_opinions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Opinion> {
    use rand::seq::SliceRandom;
    let mut v: Vec<Opinion> = (0..n)
        .map(|i| Color::from_bit(i < n / 2))
        .collect();
    v.shuffle(rng);
    v
}
