//! Decision PFSM: exploration, quality-modulated dissemination, then a decision.

use rand::RngCore;
use rand_distr::{Distribution, Exp};

use crate::comms::{MessageQueue, Radio};
use crate::mechanisms::{DecisionInput, DecisionMechanism};
use crate::world::{Color, Opinion};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfsmParams {
    pub mean_explore_s: f64,
    /// Scale of the dissemination time; the send phase has mean `send_scale_s * quality`.
    pub send_scale_s: f64,
    pub receive_s: f64,
    pub dt: f64,
}

impl Default for PfsmParams {
    fn default() -> Self {
        PfsmParams {
            mean_explore_s: 10.0,
            send_scale_s: 10.0,
            receive_s: 3.0,
            dt: 0.1,
        }
    }
}

impl PfsmParams {
    pub fn ticks(&self, seconds: f64) -> u32 {
        ((seconds / self.dt).round() as u32).max(1)
    }

    pub fn ticks_per_second(&self) -> u32 {
        ((1.0 / self.dt).round() as u32).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Exploration,
    DisseminationSend,
    DisseminationReceive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionState {
    pub phase: Phase,
    pub remaining_ticks: u32,
    pub elapsed_ticks: u32,
    pub quality_estimate: f64,
    pub match_ticks: u32,
    pub explore_duration_s: f64,
    pub send_duration_s: f64,
}

/// One application of the decision mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionEvent {
    pub w: f64,
    pub l: f64,
    pub ground: Color,
    pub previous: Opinion,
    pub new: Opinion,
}

pub fn quality_estimate(match_time: f64, explore_duration: f64) -> f64 {
    if explore_duration <= 0.0 {
        return 0.0;
    }
    (match_time / explore_duration).clamp(0.0, 1.0)
}

/// Exponential draw with the given mean; a zero mean yields zero.
pub fn sample_exp(mean: f64, rng: &mut dyn RngCore) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}

impl DecisionState {
    pub fn new(params: &PfsmParams, rng: &mut dyn RngCore) -> Self {
        let mut s = DecisionState {
            phase: Phase::Exploration,
            remaining_ticks: 0,
            elapsed_ticks: 0,
            quality_estimate: 0.0,
            match_ticks: 0,
            explore_duration_s: 0.0,
            send_duration_s: 0.0,
        };
        s.enter_exploration(params, rng);
        s
    }

    pub fn phase_timer_s(&self, params: &PfsmParams) -> f64 {
        f64::from(self.remaining_ticks) * params.dt
    }

    fn enter_exploration(&mut self, params: &PfsmParams, rng: &mut dyn RngCore) {
        let ticks = params.ticks(sample_exp(params.mean_explore_s, rng));
        self.phase = Phase::Exploration;
        self.remaining_ticks = ticks;
        self.elapsed_ticks = 0;
        self.match_ticks = 0;
        self.explore_duration_s = f64::from(ticks) * params.dt;
    }

    fn enter_send(&mut self, params: &PfsmParams, rng: &mut dyn RngCore) {
        self.quality_estimate =
            quality_estimate(f64::from(self.match_ticks), f64::from(self.elapsed_ticks));
        self.send_duration_s = sample_exp(params.send_scale_s * self.quality_estimate, rng);
        self.phase = Phase::DisseminationSend;
        self.remaining_ticks = params.ticks(self.send_duration_s);
        self.elapsed_ticks = 0;
    }

    /// Radio role for the current tick, queried before messages are exchanged.
    pub fn radio(&self, params: &PfsmParams) -> Radio {
        match self.phase {
            Phase::Exploration => Radio::Idle,
            Phase::DisseminationSend => {
                let on_beat = self.elapsed_ticks % params.ticks_per_second() == 0;
                let local_t = f64::from(self.elapsed_ticks) * params.dt;
                if on_beat && local_t < self.send_duration_s {
                    Radio::Emitting
                } else {
                    Radio::Idle
                }
            }
            Phase::DisseminationReceive => Radio::Idle,
        }
    }

    /// Advances the PFSM by one tick; returns the (possibly new) opinion and
    /// the decision made at the end of a receive window, if any.
    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &mut self,
        queue: &mut MessageQueue,
        ground: Color,
        opinion: Opinion,
        mechanism: &dyn DecisionMechanism,
        params: &PfsmParams,
        rng: &mut dyn RngCore,
    ) -> (Opinion, Option<DecisionEvent>) {
        self.elapsed_ticks += 1;
        self.remaining_ticks = self.remaining_ticks.saturating_sub(1);
        match self.phase {
            Phase::Exploration => {
                if ground == opinion {
                    self.match_ticks += 1;
                }
                if self.remaining_ticks == 0 {
                    self.enter_send(params, rng);
                }
                (opinion, None)
            }
            Phase::DisseminationSend => {
                if self.remaining_ticks == 0 {
                    self.phase = Phase::DisseminationReceive;
                    self.remaining_ticks = params.ticks(params.receive_s);
                    self.elapsed_ticks = 0;
                }
                (opinion, None)
            }
            Phase::DisseminationReceive => {
                if self.remaining_ticks > 0 {
                    return (opinion, None);
                }
                let input = DecisionInput {
                    queue,
                    ground,
                    own: opinion,
                };
                let new = mechanism.decide(&input, rng);
                let event = DecisionEvent {
                    w: queue.sensor_w().unwrap_or(0.0),
                    l: queue.sensor_l(),
                    ground,
                    previous: opinion,
                    new,
                };
                queue.clear();
                self.enter_exploration(params, rng);
                (new, Some(event))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comms::OpinionMessage;
    use crate::mechanisms::{Hc2, VoterModel};
    use crate::world::Color::{Black as B, White as W};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quality_examples() {
        assert_eq!(quality_estimate(10.0, 10.0), 1.0);
        assert_eq!(quality_estimate(5.0, 10.0), 0.5);
        assert!((quality_estimate(8.0, 10.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn send_time_mean_scales_with_quality() {
        let p = PfsmParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 10_000;
        let mut stats = Vec::new();
        for q in [0.2, 0.5, 0.8, 1.0] {
            let xs: Vec<f64> = (0..n)
                .map(|_| sample_exp(p.send_scale_s * q, &mut rng))
                .collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let se = p.send_scale_s * q / (n as f64).sqrt();
            stats.push((q, mean, se));
        }
        // 0.8 quality: mean 8 s
        let (_, m08, se08) = stats[2];
        assert!((m08 - 8.0).abs() < 4.0 * se08);
        for pair in [(0, 1), (1, 3)] {
            let (_, ma, sa) = stats[pair.0];
            let (_, mb, sb) = stats[pair.1];
            assert!(ma < mb + 3.0 * (sa * sa + sb * sb).sqrt());
            assert!(ma < mb);
        }
    }

    #[test]
    fn zero_quality_sends_nothing_for_one_tick() {
        let p = PfsmParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = DecisionState::new(&p, &mut rng);
        let mut q = MessageQueue::new();
        // Ground never matches: quality 0.
        while s.phase == Phase::Exploration {
            s.step(&mut q, B, W, &VoterModel, &p, &mut rng);
        }
        assert_eq!(s.quality_estimate, 0.0);
        assert_eq!(s.send_duration_s, 0.0);
        assert_eq!(s.remaining_ticks, 1);
        assert_eq!(s.radio(&p), Radio::Idle);
        s.step(&mut q, B, W, &VoterModel, &p, &mut rng);
        assert_eq!(s.phase, Phase::DisseminationReceive);
    }

    #[test]
    fn receive_window_then_voter_adopts_single_neighbor() {
        let p = PfsmParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = DecisionState::new(&p, &mut rng);
        let mut q = MessageQueue::new();
        while s.phase != Phase::DisseminationReceive {
            s.step(&mut q, W, W, &VoterModel, &p, &mut rng);
        }
        assert!(q.is_empty());
        q.push(
            0,
            OpinionMessage {
                sender: 5,
                opinion: B,
            },
        );
        let mut ticks = 0;
        let mut opinion = W;
        loop {
            assert_eq!(s.radio(&p), Radio::Idle);
            let (o, ev) = s.step(&mut q, W, opinion, &VoterModel, &p, &mut rng);
            ticks += 1;
            opinion = o;
            if let Some(ev) = ev {
                assert_eq!(ev.new, B);
                assert_eq!(ev.l, 0.25);
                assert_eq!(ev.w, 0.0);
                break;
            }
        }
        assert_eq!(ticks, 30);
        assert_eq!(opinion, B);
        assert_eq!(s.phase, Phase::Exploration);
        assert!(q.is_empty());
    }

    #[test]
    fn queue_spans_the_whole_cycle() {
        let p = PfsmParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = DecisionState::new(&p, &mut rng);
        let mut q = MessageQueue::new();
        assert_eq!(s.phase, Phase::Exploration);
        q.push(
            0,
            OpinionMessage {
                sender: 9,
                opinion: B,
            },
        );
        let mut opinion = W;
        let event = loop {
            let (o, ev) = s.step(&mut q, W, opinion, &VoterModel, &p, &mut rng);
            opinion = o;
            if let Some(ev) = ev {
                break ev;
            }
            assert_eq!(q.len(), 1);
        };
        assert_eq!(event.l, 0.25);
        assert_eq!(opinion, B);
        assert!(q.is_empty());
    }

    #[test]
    fn emits_once_per_second_while_sending() {
        let p = PfsmParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = DecisionState::new(&p, &mut rng);
        s.phase = Phase::DisseminationSend;
        s.send_duration_s = 2.5;
        s.remaining_ticks = p.ticks(2.5);
        s.elapsed_ticks = 0;
        let mut q = MessageQueue::new();
        let mut emitted = Vec::new();
        let mut tick = 0;
        while s.phase == Phase::DisseminationSend {
            if s.radio(&p) == Radio::Emitting {
                emitted.push(tick);
            }
            s.step(&mut q, W, W, &Hc2, &p, &mut rng);
            tick += 1;
        }
        assert_eq!(emitted, vec![0, 10, 20]);
        assert_eq!(tick, 25);
    }

    #[test]
    fn phase_cycle_and_opinion_changes_only_at_decisions() {
        let p = PfsmParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = DecisionState::new(&p, &mut rng);
        let mut q = MessageQueue::new();
        let mut opinion = B;
        let mut last_phase = s.phase;
        let mut decisions = 0;
        for t in 0..20_000u32 {
            if s.phase == Phase::DisseminationReceive && t % 7 == 0 {
                q.push(
                    0,
                    OpinionMessage {
                        sender: 1 + (t as usize % 5),
                        opinion: Color::from_bit(t % 3 == 0),
                    },
                );
            }
            let ground = Color::from_bit(t % 11 < 5);
            let before = opinion;
            let (o, ev) = s.step(&mut q, ground, opinion, &VoterModel, &p, &mut rng);
            if ev.is_none() {
                assert_eq!(o, before);
            } else {
                decisions += 1;
            }
            opinion = o;
            if s.phase != last_phase {
                let ok = matches!(
                    (last_phase, s.phase),
                    (Phase::Exploration, Phase::DisseminationSend)
                        | (Phase::DisseminationSend, Phase::DisseminationReceive)
                        | (Phase::DisseminationReceive, Phase::Exploration)
                );
                assert!(ok, "{last_phase:?} -> {:?}", s.phase);
                last_phase = s.phase;
            }
            assert!((0.0..=1.0).contains(&s.quality_estimate));
        }
        assert!(decisions > 10);
    }
}
