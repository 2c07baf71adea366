//! Mann-Whitney U test and a two-proportion z-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Exact enumeration is used when `n_a * n_b` is at most this.
pub const EXACT_PRODUCT_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwuResult {
    pub u_a: f64,
    pub u_b: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
}

fn std_normal_sf(z: f64) -> f64 {
    Normal::standard().sf(z)
}

/// Midranks (1-based) of the pooled sample, plus the tie-group sizes.
fn pooled_ranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        let mid = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = mid;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Config("Mann-Whitney U needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::Config("Mann-Whitney U input contains NaN".into()));
    }
    Ok(())
}

fn u_statistics(a: &[f64], ranks: &[f64]) -> (f64, f64) {
    let na = a.len() as f64;
    let nb = (ranks.len() - a.len()) as f64;
    let ra: f64 = ranks[..a.len()].iter().sum();
    let u_a = ra - na * (na + 1.0) / 2.0;
    (u_a, na * nb - u_a)
}

/// Normal approximation with tie and continuity corrections.
pub fn mann_whitney_u_normal(a: &[f64], b: &[f64]) -> Result<MwuResult> {
    check(a, b)?;
    let (ranks, ties) = pooled_ranks(a, b);
    let (u_a, u_b) = u_statistics(a, &ranks);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = if n > 1.0 {
        na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    let mean = na * nb / 2.0;
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u_a - mean).abs() - 0.5).max(0.0) / var.sqrt();
        (2.0 * std_normal_sf(z)).min(1.0)
    };
    Ok(MwuResult {
        u_a,
        u_b,
        p,
        exact: false,
    })
}

/// Exact permutation distribution of U over all splits of the pooled midranks.
pub fn mann_whitney_u_exact(a: &[f64], b: &[f64]) -> Result<MwuResult> {
    check(a, b)?;
    let (ranks, _) = pooled_ranks(a, b);
    let (u_a, u_b) = u_statistics(a, &ranks);
    let na = a.len();
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();

    // ways[k][s]: subsets of size k with doubled rank sum s.
    let mut ways = vec![vec![0.0f64; max_sum + 1]; na + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=na).rev() {
            for s in (r..=max_sum).rev() {
                let add = ways[k - 1][s - r];
                if add != 0.0 {
                    ways[k][s] += add;
                }
            }
        }
    }
    let total: f64 = ways[na].iter().sum();
    let mean = (na * b.len()) as f64 / 2.0;
    let observed = (u_a - mean).abs();
    let offset = (na * (na + 1)) as f64 / 2.0;
    let extreme: f64 = ways[na]
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .filter(|(s, _)| ((*s as f64 / 2.0 - offset) - mean).abs() >= observed - 1e-9)
        .map(|(_, w)| w)
        .sum();
    Ok(MwuResult {
        u_a,
        u_b,
        p: (extreme / total).min(1.0),
        exact: true,
    })
}

/// Two-sided test; exact for small samples, normal approximation otherwise.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MwuResult> {
    if a.len() * b.len() <= EXACT_PRODUCT_LIMIT {
        mann_whitney_u_exact(a, b)
    } else {
        mann_whitney_u_normal(a, b)
    }
}

/// Two-sided pooled z-test for equal success proportions.
pub fn two_proportion_test(hits_a: usize, n_a: usize, hits_b: usize, n_b: usize) -> f64 {
    if n_a == 0 || n_b == 0 {
        return 1.0;
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let pooled = (hits_a + hits_b) as f64 / (na + nb);
    let var = pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb);
    if var <= 0.0 {
        return 1.0;
    }
    let z = (hits_a as f64 / na - hits_b as f64 / nb).abs() / var.sqrt();
    (2.0 * std_normal_sf(z)).min(1.0)
}
