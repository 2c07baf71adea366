use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulation::DecisionLogRow;

/// Counts per discrete input level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub value: f64,
    pub count: usize,
}

fn levels(values: &[f64]) -> Vec<Level> {
    values.iter().map(|&value| Level { value, count: 0 }).collect()
}

fn bump(hist: &mut [Level], x: f64) {
    let nearest = hist
        .iter_mut()
        .min_by(|a, b| (a.value - x).abs().total_cmp(&(b.value - x).abs()))
        .expect("non-empty histogram");
    nearest.count += 1;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    /// Reachable w values, including thirds from three-entry queues.
    pub w: Vec<Level>,
    /// Decisions taken with an empty queue, where w is undefined.
    pub w_undefined: usize,
    pub l: Vec<Level>,
    pub g: Vec<Level>,
    pub o_prev: Vec<Level>,
    pub rows: usize,
}

impl InputDistribution {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema=v1\ninput,value,count\n");
        for (name, hist) in [("w", &self.w), ("l", &self.l), ("g", &self.g), ("o_prev", &self.o_prev)] {
            for lv in hist {
                out.push_str(&format!("{name},{},{}\n", lv.value, lv.count));
            }
        }
        out.push_str(&format!("w,undefined,{}\n", self.w_undefined));
        out
    }
}

pub fn input_distribution(log: &[DecisionLogRow]) -> Result<InputDistribution> {
    if log.is_empty() {
        return Err(Error::Config("decision log is empty".into()));
    }
    let mut dist = InputDistribution {
        w: levels(&[0.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75, 1.0]),
        w_undefined: 0,
        l: levels(&[0.0, 0.25, 0.5, 0.75, 1.0]),
        g: levels(&[0.0, 1.0]),
        o_prev: levels(&[0.0, 1.0]),
        rows: log.len(),
    };
    for row in log {
        if row.l == 0.0 {
            dist.w_undefined += 1;
        } else {
            bump(&mut dist.w, row.w);
        }
        bump(&mut dist.l, row.l);
        bump(&mut dist.g, row.g.value());
        bump(&mut dist.o_prev, row.o_prev.value());
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Color::{self, Black as B, White as W};

    fn row(w: f64, l: f64, g: Color, o: Color) -> DecisionLogRow {
        DecisionLogRow {
            t: 0.0,
            robot: 0,
            w,
            l,
            g,
            o_prev: o,
            o_new: o,
        }
    }

    fn counts(h: &[Level]) -> Vec<usize> {
        h.iter().map(|l| l.count).collect()
    }

    #[test]
    fn hand_counted_ten_rows() {
        let log = vec![
            row(1.0, 1.0, W, W),
            row(1.0, 1.0, W, W),
            row(0.75, 1.0, B, W),
            row(2.0 / 3.0, 0.75, W, B),
            row(0.5, 0.5, B, B),
            row(0.0, 0.0, B, B),
            row(0.0, 1.0, B, B),
            row(1.0 / 3.0, 0.75, W, B),
            row(0.25, 1.0, B, W),
            row(1.0, 0.25, W, W),
        ];
        let d = input_distribution(&log).unwrap();
        assert_eq!(counts(&d.w), vec![1, 1, 1, 1, 1, 1, 3]);
        assert_eq!(d.w_undefined, 1);
        assert_eq!(counts(&d.l), vec![1, 1, 1, 2, 5]);
        assert_eq!(counts(&d.g), vec![5, 5]);
        assert_eq!(counts(&d.o_prev), vec![5, 5]);
    }

    #[test]
    fn full_queues_put_all_l_mass_at_one() {
        let log: Vec<_> = (0..40).map(|i| row((i % 5) as f64 / 4.0, 1.0, W, B)).collect();
        let d = input_distribution(&log).unwrap();
        assert_eq!(counts(&d.l), vec![0, 0, 0, 0, 40]);
        // Symmetric w values give a symmetric histogram.
        let w = counts(&d.w);
        assert_eq!(w, w.iter().rev().copied().collect::<Vec<_>>());
    }

    #[test]
    fn empty_log_rejected() {
        assert!(input_distribution(&[]).is_err());
    }
}
