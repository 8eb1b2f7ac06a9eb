//! Kendall's tau trend test of a sequence against its arrival order.
//!
//! `tau` follows the tau-b convention (ties in the values shrink the
//! denominator; the index has no ties). The p-value is exact for `n <= 50`
//! with no tied values, computed from the null distribution of the inversion
//! count of a uniformly random permutation. Otherwise the normal approximation
//! with tie-corrected variance and a continuity correction of 1 is used.
//!
//! The concordance count uses a merge sort, so the statistic is `O(n log n)`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest `n` for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Values increase with time (`tau > 0`).
    Increasing,
    /// Values decrease with time (`tau < 0`).
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub tau: f64,
    pub p_value: f64,
    pub n: usize,
    /// Concordant minus discordant pairs.
    pub s: i64,
    pub alternative: Alternative,
    pub exact: bool,
}

/// Pair counts for `x` against the index `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PairCounts {
    pub concordant: u64,
    pub discordant: u64,
    /// Pairs with equal values.
    pub tied: u64,
    /// `sum over tie groups of t(t-1)(2t+5)`, for the variance correction.
    pub tie_variance_term: u64,
}

pub(crate) fn count_pairs(x: &[f64]) -> PairCounts {
    let n = x.len() as u64;
    let total = n * n.saturating_sub(1) / 2;

    let mut work = x.to_vec();
    let mut scratch = vec![0.0; x.len()];
    let discordant = merge_count(&mut work, &mut scratch);

    // `work` is now sorted; walk tie groups.
    let (mut tied, mut tie_variance_term) = (0u64, 0u64);
    let mut i = 0;
    while i < work.len() {
        let mut j = i + 1;
        while j < work.len() && work[j] == work[i] {
            j += 1;
        }
        let t = (j - i) as u64;
        tied += t * (t - 1) / 2;
        tie_variance_term += t * (t - 1) * (2 * t + 5);
        i = j;
    }

    PairCounts {
        concordant: total - discordant - tied,
        discordant,
        tied,
        tie_variance_term,
    }
}

/// Stable merge sort returning the number of strict inversions `i < j, x_i > x_j`.
fn merge_count(v: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (l, r) = v.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        merge_count(l, sl) + merge_count(r, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            scratch[k] = v[i];
            i += 1;
        } else {
            scratch[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..n].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    inv
}

/// Null distribution of the inversion count of a random permutation of `n`
/// elements: `P(D = d)` for `d = 0..=n(n-1)/2`.
///
/// `D` is a sum of independent uniforms on `{0..k-1}`, `k = 1..n`; each factor
/// is convolved in with a sliding-window sum.
pub(crate) fn inversion_distribution(n: usize) -> Vec<f64> {
    let max = n * n.saturating_sub(1) / 2;
    let mut dist = vec![0.0; max + 1];
    dist[0] = 1.0;
    let mut support = 0;
    let mut next = vec![0.0; max + 1];
    for k in 2..=n {
        let new_support = support + k - 1;
        let mut window = 0.0;
        for d in 0..=new_support {
            if d <= support {
                window += dist[d];
            }
            if d >= k && d - k <= support {
                window -= dist[d - k];
            }
            next[d] = window / k as f64;
        }
        support = new_support;
        dist[..=support].copy_from_slice(&next[..=support]);
    }
    dist
}

fn exact_p_value(n: usize, discordant: u64, alternative: Alternative) -> f64 {
    let dist = inversion_distribution(n);
    let total = dist.len() - 1;
    let d = discordant as usize;
    // S >= s  <=>  D <= d, and the distribution is symmetric about total / 2.
    let cdf = |upto: usize| dist[..=upto].iter().sum::<f64>();
    let p = match alternative {
        Alternative::Increasing => cdf(d),
        Alternative::Decreasing => cdf(total - d),
        Alternative::TwoSided => 2.0 * cdf(d.min(total - d)),
    };
    p.min(1.0)
}

fn normal_p_value(n: usize, s: i64, tie_variance_term: u64, alternative: Alternative) -> f64 {
    let nf = n as f64;
    let var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_variance_term as f64) / 18.0;
    let sd = var.sqrt();
    let upper = |z: f64| 0.5 * erfc(z / std::f64::consts::SQRT_2);
    let s = s as f64;
    let p = match alternative {
        Alternative::Increasing => upper((s - 1.0) / sd),
        Alternative::Decreasing => upper((-s - 1.0) / sd),
        Alternative::TwoSided => 2.0 * upper(((s.abs() - 1.0) / sd).max(0.0)),
    };
    // The tail can underflow for very long, strongly trending series.
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

/// Two-sided Kendall trend test of `x` against its index order.
pub fn kendall_tau_test(x: &[f64]) -> Result<TrendResult> {
    kendall_tau_test_with(x, Alternative::TwoSided)
}

pub fn kendall_tau_test_with(x: &[f64], alternative: Alternative) -> Result<TrendResult> {
    let n = x.len();
    if n < 3 {
        return Err(Error::insufficient(3, n));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("value at position {} is not finite", i + 1)));
    }
    let counts = count_pairs(x);
    let total = (n as u64) * (n as u64 - 1) / 2;
    if counts.tied == total {
        return Err(Error::Degenerate(
            "Kendall's tau is undefined for a constant sequence".into(),
        ));
    }
    let s = counts.concordant as i64 - counts.discordant as i64;
    let denom = ((total - counts.tied) as f64 * total as f64).sqrt();
    let tau = (s as f64 / denom).clamp(-1.0, 1.0);

    let exact = n <= EXACT_MAX_N && counts.tied == 0;
    let p_value = if exact {
        exact_p_value(n, counts.discordant, alternative)
    } else {
        normal_p_value(n, s, counts.tie_variance_term, alternative)
    };
    Ok(TrendResult {
        tau,
        p_value,
        n,
        s,
        alternative,
        exact,
    })
}

/// Means of `n_blocks` contiguous blocks in arrival order. Block sizes differ
/// by at most one; the first `len % n_blocks` blocks take the extra element.
pub fn block_means(values: &[f64], n_blocks: usize) -> Result<Vec<f64>> {
    if n_blocks < 3 {
        return Err(Error::Config(format!("n_blocks must be >= 3, got {n_blocks}")));
    }
    if values.len() < n_blocks {
        return Err(Error::insufficient(n_blocks, values.len()));
    }
    let base = values.len() / n_blocks;
    let extra = values.len() % n_blocks;
    let mut means = Vec::with_capacity(n_blocks);
    let mut start = 0;
    for b in 0..n_blocks {
        let len = base + usize::from(b < extra);
        let block = &values[start..start + len];
        means.push(block.iter().sum::<f64>() / len as f64);
        start += len;
    }
    Ok(means)
}

/// Kendall trend test on contiguous block means.
pub fn blocked_trend(values: &[f64], n_blocks: usize) -> Result<TrendResult> {
    kendall_tau_test(&block_means(values, n_blocks)?)
}
