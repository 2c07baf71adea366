use rand::RngCore;

use super::{DecisionInput, DecisionMechanism};
use crate::comms::MessageQueue;
use crate::world::{Color, Opinion};

/// Majority over the queue plus the robot's own opinion; ties keep the own opinion.
pub fn majority_rule(queue: &MessageQueue, own: Opinion) -> Opinion {
    let mut white = queue.count(Color::White);
    let mut black = queue.len() - white;
    match own {
        Color::White => white += 1,
        Color::Black => black += 1,
    }
    match white.cmp(&black) {
        std::cmp::Ordering::Greater => Color::White,
        std::cmp::Ordering::Less => Color::Black,
        std::cmp::Ordering::Equal => own,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityRule;

impl DecisionMechanism for MajorityRule {
    fn name(&self) -> &str {
        "mr"
    }

    fn decide(&self, input: &DecisionInput<'_>, _rng: &mut dyn RngCore) -> Opinion {
        majority_rule(input.queue, input.own)
    }
}
