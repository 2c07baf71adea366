//! The two hand-coded mechanisms built from w(t) and g(t).
//!
//! Thresholds are compared on integer counts so that w = 2/3 hits the
//! HC1 boundary exactly.

use rand::RngCore;

use super::{DecisionInput, DecisionMechanism};
use crate::comms::MessageQueue;
use crate::world::{Color, Opinion};

/// White iff `0.75 w + 0.25 g >= 0.5`; an empty queue keeps the own opinion.
pub fn hc1(queue: &MessageQueue, ground: Color, own: Opinion) -> Opinion {
    let n = queue.len();
    if n == 0 {
        return own;
    }
    let whites = queue.count(Color::White);
    // 0.75 k/n + 0.25 g >= 0.5  <=>  3k + g n >= 2n
    Color::from_bit(3 * whites + usize::from(ground.bit()) * n >= 2 * n)
}

/// Clear neighbor majorities (w >= 0.75 or w <= 0.25) win; otherwise the ground decides.
pub fn hc2(queue: &MessageQueue, ground: Color, own: Opinion) -> Opinion {
    let n = queue.len();
    if n == 0 {
        return own;
    }
    let w = queue.count(Color::White) as f64 / n as f64;
    hc2_threshold(w, ground)
}

/// The non-empty branch of HC2 in terms of the w sensor.
pub fn hc2_threshold(w: f64, ground: Color) -> Opinion {
    if w >= 0.75 {
        Color::White
    } else if w <= 0.25 {
        Color::Black
    } else {
        ground
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Hc1;

impl DecisionMechanism for Hc1 {
    fn name(&self) -> &str {
        "hc1"
    }

    fn decide(&self, input: &DecisionInput<'_>, _rng: &mut dyn RngCore) -> Opinion {
        hc1(input.queue, input.ground, input.own)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Hc2;

impl DecisionMechanism for Hc2 {
    fn name(&self) -> &str {
        "hc2"
    }

    fn decide(&self, input: &DecisionInput<'_>, _rng: &mut dyn RngCore) -> Opinion {
        hc2(input.queue, input.ground, input.own)
    }
}
