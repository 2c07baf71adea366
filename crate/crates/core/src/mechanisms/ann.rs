//! 4-3-1 feedforward network: tanh hidden layer, logistic output.
//!
//! Genome layout: hidden weights row by row (3 x 4), hidden biases (3),
//! output weights (3), output bias (1).

use rand::RngCore;

use super::{DecisionInput, DecisionMechanism};
use crate::evolution::Genome;
use crate::world::{Color, Opinion};

pub const INPUTS: usize = 4;
pub const HIDDEN: usize = 3;

/// Network inputs `[w, l, g, o_prev]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnInputs(pub [f64; INPUTS]);

impl AnnInputs {
    pub fn new(w: f64, l: f64, g: Color, o_prev: Opinion) -> Self {
        AnnInputs([w, l, g.value(), o_prev.value()])
    }

    /// An empty queue is presented as `w = 0, l = 0`.
    pub fn from_decision(input: &DecisionInput<'_>) -> Self {
        let w = input.queue.sensor_w().unwrap_or(0.0);
        AnnInputs::new(w, input.queue.sensor_l(), input.ground, input.own)
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Pre-threshold network output y in (0, 1).
pub fn ann_output(genome: &Genome, x: &[f64; INPUTS]) -> f64 {
    let g = genome.weights();
    let (hidden_w, rest) = g.split_at(HIDDEN * INPUTS);
    let (hidden_b, rest) = rest.split_at(HIDDEN);
    let (out_w, out_b) = rest.split_at(HIDDEN);
    let mut acc = out_b[0];
    for j in 0..HIDDEN {
        let row = &hidden_w[j * INPUTS..(j + 1) * INPUTS];
        let pre: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + hidden_b[j];
        acc += out_w[j] * pre.tanh();
    }
    logistic(acc)
}

pub fn ann_decide(genome: &Genome, w: f64, l: f64, g: Color, o_prev: Opinion) -> Opinion {
    let x = AnnInputs::new(w, l, g, o_prev);
    Color::from_bit(ann_output(genome, &x.0) >= 0.5)
}

#[derive(Debug, Clone)]
pub struct AnnMechanism {
    genome: Genome,
    name: String,
}

impl AnnMechanism {
    pub fn new(genome: Genome, name: impl Into<String>) -> crate::Result<Self> {
        Ok(AnnMechanism {
            genome,
            name: name.into(),
        })
    }

    pub fn genome(&self) -> &Genome {
        &self.genome
    }
}

impl DecisionMechanism for AnnMechanism {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&self, input: &DecisionInput<'_>, _rng: &mut dyn RngCore) -> Opinion {
        let x = AnnInputs::from_decision(input);
        Color::from_bit(ann_output(&self.genome, &x.0) >= 0.5)
    }
}
