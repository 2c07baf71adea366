//! Opinion broadcasting, bounded message queues and the two virtual sensors.

use crate::error::{Error, Result};
use crate::robot::Pose;
use crate::world::{Color, Opinion};

pub const QUEUE_CAPACITY: usize = 4;
pub const COMM_RANGE: f64 = 0.70;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpinionMessage {
    pub sender: usize,
    pub opinion: Opinion,
}

/// Insertion-ordered queue of at most four distinct senders.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageQueue {
    entries: Vec<OpinionMessage>,
    rejected_self: u32,
}

impl MessageQueue {
    pub fn new() -> Self {
        MessageQueue {
            entries: Vec::with_capacity(QUEUE_CAPACITY),
            rejected_self: 0,
        }
    }

    pub fn from_opinions(opinions: &[Opinion]) -> Self {
        let mut q = MessageQueue::new();
        for (i, &o) in opinions.iter().enumerate() {
            q.push(usize::MAX, OpinionMessage { sender: i, opinion: o });
        }
        q
    }

    /// Adds a message for a queue owned by robot `owner`.
    ///
    /// Known senders are overwritten in place; a new sender evicts the oldest
    /// entry once the queue is full. Self-messages are dropped and counted.
    pub fn push(&mut self, owner: usize, msg: OpinionMessage) {
        if msg.sender == owner {
            self.rejected_self += 1;
            return;
        }
        if let Some(e) = self.entries.iter_mut().find(|e| e.sender == msg.sender) {
            e.opinion = msg.opinion;
            return;
        }
        if self.entries.len() == QUEUE_CAPACITY {
            self.entries.remove(0);
        }
        self.entries.push(msg);
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[OpinionMessage] {
        &self.entries
    }

    pub fn opinions(&self) -> impl Iterator<Item = Opinion> + '_ {
        self.entries.iter().map(|e| e.opinion)
    }

    pub fn count(&self, color: Color) -> usize {
        self.opinions().filter(|&o| o == color).count()
    }

    pub fn rejected_self(&self) -> u32 {
        self.rejected_self
    }

    /// l(t): queue length normalized by the capacity.
    pub fn sensor_l(&self) -> f64 {
        self.len() as f64 / QUEUE_CAPACITY as f64
    }

    /// w(t): share of queued neighbor opinions that are White.
    pub fn sensor_w(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::UndefinedSensor);
        }
        Ok(self.count(Color::White) as f64 / self.len() as f64)
    }
}

/// Per-tick communication role of a robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Radio {
    Idle,
    /// Emits its opinion this tick.
    Emitting,
}

/// Resolves one tick of broadcasts synchronously.
///
/// Every emitting robot reaches every other robot within [`COMM_RANGE`]
/// (center to center, strict), whatever phase the receiver is in. Returns the
/// number of enqueued deliveries.
pub fn deliver_broadcasts(
    poses: &[Pose],
    opinions: &[Opinion],
    radios: &[Radio],
    queues: &mut [MessageQueue],
) -> usize {
    let senders: Vec<usize> = (0..radios.len())
        .filter(|&i| radios[i] == Radio::Emitting)
        .collect();
    if senders.is_empty() {
        return 0;
    }
    let mut delivered = 0;
    for (rx, queue) in queues.iter_mut().enumerate() {
        for &tx in &senders {
            if tx != rx && poses[tx].distance(&poses[rx]) < COMM_RANGE {
                queue.push(
                    rx,
                    OpinionMessage {
                        sender: tx,
                        opinion: opinions[tx],
                    },
                );
                delivered += 1;
            }
        }
    }
    delivered
}
