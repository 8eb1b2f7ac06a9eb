//! Independent oracles shared by integration tests.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// (concordant, discordant) by enumerating every index pair.
pub fn pair_counts(x: &[f64]) -> (i64, i64) {
    let (mut c, mut d) = (0, 0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if x[j] > x[i] {
                c += 1;
            } else if x[j] < x[i] {
                d += 1;
            }
        }
    }
    (c, d)
}

/// Exact permutation counts by inversion number, `counts[n][d]`, for `n <= max_n`,
/// from the product `prod_k (1 + q + ... + q^(k-1))` in arbitrary precision.
pub fn inversion_counts(max_n: usize) -> Vec<Vec<BigUint>> {
    let mut table = vec![vec![BigUint::one()]];
    for k in 1..=max_n {
        let prev = table.last().unwrap();
        let mut next = vec![BigUint::zero(); prev.len() + k - 1];
        for (d, c) in prev.iter().enumerate() {
            for j in 0..k {
                next[d + j] += c;
            }
        }
        table.push(next);
    }
    table
}

/// Two-sided exact Kendall p-value: `P(|S| >= |s_obs|)` under random permutation.
pub fn exact_two_sided(counts: &[BigUint], discordant: usize) -> f64 {
    let total_pairs = counts.len() - 1;
    let m = discordant.min(total_pairs - discordant);
    let tail: BigUint = counts[..=m].iter().sum();
    let all: BigUint = counts.iter().sum();
    let p = 2.0 * tail.to_f64().unwrap() / all.to_f64().unwrap();
    p.min(1.0)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
