use rand::{Rng, RngCore};

use super::{DecisionInput, DecisionMechanism};
use crate::comms::MessageQueue;
use crate::world::Opinion;

/// Adopts the opinion of a uniformly drawn queue entry; keeps its own on an empty queue.
pub fn voter_model(queue: &MessageQueue, own: Opinion, rng: &mut dyn RngCore) -> Opinion {
    if queue.is_empty() {
        return own;
    }
    let pick = rng.random_range(0..queue.len());
    queue.entries()[pick].opinion
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VoterModel;

impl DecisionMechanism for VoterModel {
    fn name(&self) -> &str {
        "vm"
    }

    fn decide(&self, input: &DecisionInput<'_>, rng: &mut dyn RngCore) -> Opinion {
        voter_model(input.queue, input.own, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Color::{Black as B, White as W};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unanimous_and_empty() {
        let q = MessageQueue::from_opinions(&[W, W, W]);
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            assert_eq!(voter_model(&q, B, &mut rng), W);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(voter_model(&MessageQueue::new(), B, &mut rng), B);
    }

    #[test]
    fn split_queue_is_a_fair_coin() {
        let q = MessageQueue::from_opinions(&[W, B]);
        let n = 10_000;
        let whites = (0..n)
            .filter(|&s| voter_model(&q, B, &mut ChaCha8Rng::seed_from_u64(s)) == W)
            .count();
        let f = whites as f64 / n as f64;
        assert!((f - 0.5).abs() <= 0.02, "{f}");
    }
}
