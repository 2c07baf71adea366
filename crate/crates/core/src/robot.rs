//! Differential-drive kinematics, proximity sensing and the random-walk motion FSM.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::ARENA_SIZE;

pub const BODY_RADIUS: f64 = 0.035;
pub const AXLE_LENGTH: f64 = 0.05;
pub const MAX_WHEEL_SPEED: f64 = 0.10;
pub const SENSOR_RANGE: f64 = 0.10;
/// Ray bearings relative to heading, right to left.
pub const RAY_BEARINGS_DEG: [f64; 5] = [-60.0, -30.0, 0.0, 30.0, 60.0];

pub const MEAN_STRAIGHT_S: f64 = 40.0;
pub const MAX_ROTATION_S: f64 = 4.5;
pub const AVOIDANCE_JITTER_DEG: f64 = 25.0;
pub const STUCK_BUFFER_MAX_S: f64 = 7.5;

/// In-place angular speed with both wheels at full speed in opposite directions.
pub const ROTATION_RATE: f64 = 2.0 * MAX_WHEEL_SPEED / AXLE_LENGTH;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose {
            x,
            y,
            heading: heading.rem_euclid(TAU),
        }
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelSpeeds {
    pub left: f64,
    pub right: f64,
}

impl WheelSpeeds {
    pub const STOP: WheelSpeeds = WheelSpeeds {
        left: 0.0,
        right: 0.0,
    };

    pub fn forward() -> Self {
        WheelSpeeds {
            left: MAX_WHEEL_SPEED,
            right: MAX_WHEEL_SPEED,
        }
    }

    /// `direction` +1 turns counter-clockwise, -1 clockwise.
    pub fn spin(direction: f64) -> Self {
        WheelSpeeds {
            left: -direction * MAX_WHEEL_SPEED,
            right: direction * MAX_WHEEL_SPEED,
        }
    }
}

/// Unicycle update with exact arc integration.
pub fn integrate_pose(pose: Pose, v_left: f64, v_right: f64, dt: f64, axle: f64) -> Result<Pose> {
    for v in [v_left, v_right] {
        if v.abs() > MAX_WHEEL_SPEED + 1e-12 {
            return Err(Error::WheelSpeed(v));
        }
    }
    let v = 0.5 * (v_left + v_right);
    let omega = (v_right - v_left) / axle;
    let theta = pose.heading;
    let (x, y) = if omega.abs() < 1e-12 {
        (pose.x + v * dt * theta.cos(), pose.y + v * dt * theta.sin())
    } else {
        let r = v / omega;
        let end = theta + omega * dt;
        (
            pose.x + r * (end.sin() - theta.sin()),
            pose.y - r * (end.cos() - theta.cos()),
        )
    };
    Ok(Pose::new(x, y, theta + omega * dt))
}

/// Distances from the sensor on the body edge to the nearest obstacle per ray.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProximityReadings(pub [Option<f64>; 5]);

impl ProximityReadings {
    pub fn any(&self) -> bool {
        self.0.iter().any(Option::is_some)
    }

    fn side_min(&self, idx: &[usize]) -> f64 {
        idx.iter()
            .filter_map(|&i| self.0[i])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn right_min(&self) -> f64 {
        self.side_min(&[0, 1])
    }

    pub fn left_min(&self) -> f64 {
        self.side_min(&[3, 4])
    }
}

fn ray_wall_distance(ox: f64, oy: f64, dx: f64, dy: f64) -> f64 {
    let mut best = f64::INFINITY;
    for (o, d) in [(ox, dx), (oy, dy)] {
        if d > 1e-12 {
            best = best.min((ARENA_SIZE - o) / d);
        } else if d < -1e-12 {
            best = best.min(-o / d);
        }
    }
    best.max(0.0)
}

fn ray_disc_distance(ox: f64, oy: f64, dx: f64, dy: f64, cx: f64, cy: f64, r: f64) -> f64 {
    let fx = ox - cx;
    let fy = oy - cy;
    let c = fx * fx + fy * fy - r * r;
    if c <= 0.0 {
        return 0.0;
    }
    let b = fx * dx + fy * dy;
    let disc = b * b - c;
    if b >= 0.0 || disc < 0.0 {
        return f64::INFINITY;
    }
    -b - disc.sqrt()
}

/// Casts the five front rays against the arena walls and the other robots' bodies.
pub fn sense_proximity<'a, I>(pose: &Pose, others: I) -> ProximityReadings
where
    I: IntoIterator<Item = &'a Pose>,
{
    let nearby: Vec<&Pose> = others
        .into_iter()
        .filter(|o| pose.distance(o) < 2.0 * BODY_RADIUS + SENSOR_RANGE + 1e-9)
        .collect();
    let mut out = [None; 5];
    for (slot, bearing) in out.iter_mut().zip(RAY_BEARINGS_DEG) {
        let angle = pose.heading + bearing.to_radians();
        let (dx, dy) = (angle.cos(), angle.sin());
        let ox = pose.x + BODY_RADIUS * dx;
        let oy = pose.y + BODY_RADIUS * dy;
        let mut d = ray_wall_distance(ox, oy, dx, dy);
        for other in &nearby {
            d = d.min(ray_disc_distance(ox, oy, dx, dy, other.x, other.y, BODY_RADIUS));
        }
        if d <= SENSOR_RANGE {
            *slot = Some(d);
        }
    }
    ProximityReadings(out)
}

/// True if a body centered at `pose` overlaps a wall or any of `others`.
pub fn collides<'a, I>(pose: &Pose, others: I) -> bool
where
    I: IntoIterator<Item = &'a Pose>,
{
    let lo = BODY_RADIUS;
    let hi = ARENA_SIZE - BODY_RADIUS;
    if pose.x < lo || pose.x > hi || pose.y < lo || pose.y > hi {
        return true;
    }
    others
        .into_iter()
        .any(|o| pose.distance(o) < 2.0 * BODY_RADIUS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MotionMode {
    Straight,
    Rotation,
    ObstacleAvoidance,
    Unstuck,
}

impl MotionMode {
    pub fn is_rotating(self) -> bool {
        !matches!(self, MotionMode::Straight)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub mode: MotionMode,
    /// Seconds left in Straight or Rotation.
    pub mode_timer: f64,
    /// Radians left to turn in ObstacleAvoidance.
    pub target_turn: f64,
    /// Rotation-time buffer; negative means the robot has mostly been turning lately.
    pub stuck_buffer: f64,
    pub rotation_direction: f64,
}

fn sample_straight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp::new(1.0 / MEAN_STRAIGHT_S)
        .expect("positive rate")
        .sample(rng)
}

fn coin<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

impl MotionState {
    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        MotionState {
            mode: MotionMode::Straight,
            mode_timer: sample_straight(rng),
            target_turn: 0.0,
            stuck_buffer: STUCK_BUFFER_MAX_S,
            rotation_direction: 1.0,
        }
    }

    fn enter_straight<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.mode = MotionMode::Straight;
        self.mode_timer = sample_straight(rng);
        self.target_turn = 0.0;
    }

    fn enter_rotation<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.mode = MotionMode::Rotation;
        self.mode_timer = rng.random_range(0.0..=MAX_ROTATION_S);
        self.rotation_direction = coin(rng);
    }

    fn enter_avoidance<R: Rng + ?Sized>(&mut self, readings: &ProximityReadings, rng: &mut R) {
        let jitter = rng.random_range(-AVOIDANCE_JITTER_DEG..=AVOIDANCE_JITTER_DEG);
        self.mode = MotionMode::ObstacleAvoidance;
        self.target_turn = (180.0 + jitter).to_radians();
        let (left, right) = (readings.left_min(), readings.right_min());
        self.rotation_direction = if left < right {
            -1.0
        } else if right < left {
            1.0
        } else {
            coin(rng)
        };
    }

    fn enter_unstuck<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.mode = MotionMode::Unstuck;
        self.target_turn = 0.0;
        self.rotation_direction = coin(rng);
    }
}

/// Advances the motion FSM by one tick.
///
/// A tick that changes mode is spent switching: the wheels stop and the new
/// mode starts acting on the next tick with its full timer or turn target.
pub fn motion_step<R: Rng + ?Sized>(
    state: MotionState,
    readings: &ProximityReadings,
    dt: f64,
    rng: &mut R,
) -> (MotionState, WheelSpeeds) {
    let mut next = state;
    let detected = readings.any();

    let switched = match state.mode {
        MotionMode::Straight if detected => {
            next.enter_avoidance(readings, rng);
            true
        }
        MotionMode::Straight if state.mode_timer <= 1e-9 => {
            next.enter_rotation(rng);
            true
        }
        MotionMode::Rotation if state.mode_timer <= 1e-9 => {
            next.enter_straight(rng);
            true
        }
        MotionMode::ObstacleAvoidance if state.stuck_buffer < 0.0 => {
            next.enter_unstuck(rng);
            true
        }
        MotionMode::ObstacleAvoidance if state.target_turn <= 1e-9 => {
            next.enter_straight(rng);
            true
        }
        MotionMode::Unstuck if !detected => {
            next.enter_straight(rng);
            true
        }
        _ => false,
    };
    if switched {
        return (next, WheelSpeeds::STOP);
    }

    let speeds = match next.mode {
        MotionMode::Straight => {
            next.mode_timer = (next.mode_timer - dt).max(0.0);
            next.stuck_buffer = (next.stuck_buffer + dt).min(STUCK_BUFFER_MAX_S);
            WheelSpeeds::forward()
        }
        MotionMode::Rotation => {
            next.mode_timer = (next.mode_timer - dt).max(0.0);
            next.stuck_buffer -= dt;
            WheelSpeeds::spin(next.rotation_direction)
        }
        MotionMode::ObstacleAvoidance => {
            next.target_turn -= ROTATION_RATE * dt;
            next.stuck_buffer -= dt;
            WheelSpeeds::spin(next.rotation_direction)
        }
        MotionMode::Unstuck => {
            next.stuck_buffer -= dt;
            WheelSpeeds::spin(next.rotation_direction)
        }
    };
    (next, speeds)
}

/// Heading difference folded into (-pi, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}
