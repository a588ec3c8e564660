//! Two-sided Mann-Whitney-Wilcoxon rank-sum test.

use alloc::vec;
use alloc::vec::Vec;

use super::dist::normal_two_sided_p;
use super::StatsError;

/// Largest combined sample size for which the exact null distribution is
/// enumerated (tie-free samples only).
pub const EXACT_MAX_N: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankMethod {
    Exact,
    /// Normal approximation with tie and continuity corrections.
    Normal { z: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankTestResult {
    /// U of the first group.
    pub u_statistic: f64,
    pub method: RankMethod,
    pub p_value: f64,
    pub group_means: [f64; 2],
    pub group_ns: [usize; 2],
}

/// Midranks (1-based) of `values` and the tie correction term
/// Σ (t³ - t) over tie groups.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        let t = (end - start) as f64;
        ties += t * t * t - t;
        start = end;
    }
    (ranks, ties)
}

/// Number of arrangements giving each U in 0..=n1*n2 under the null.
pub fn exact_u_counts(n1: usize, n2: usize) -> Vec<u128> {
    // f[i][j][u]: arrangements of i + j items with U = u; rolled over i
    let max_u = n1 * n2;
    let mut prev: Vec<Vec<u128>> = (0..=n2).map(|_| vec![0u128; max_u + 1]).collect();
    for row in prev.iter_mut() {
        row[0] = 1;
    }
    for i in 1..=n1 {
        let mut cur: Vec<Vec<u128>> = (0..=n2).map(|_| vec![0u128; max_u + 1]).collect();
        cur[0][0] = 1;
        for j in 1..=n2 {
            for u in 0..=i * j {
                // largest item from group 1 beats all j of group 2, or it is from group 2
                let from_first = if u >= j { prev[j][u - j] } else { 0 };
                cur[j][u] = from_first + cur[j - 1][u];
            }
        }
        prev = cur;
    }
    prev.swap_remove(n2)
}

/// Exact two-sided p-value: twice the smaller tail, capped at 1.
pub fn exact_p_value(u: f64, n1: usize, n2: usize) -> f64 {
    let counts = exact_u_counts(n1, n2);
    let total: u128 = counts.iter().sum();
    let u = libm::round(u) as usize;
    let lower: u128 = counts[..=u.min(counts.len() - 1)].iter().sum();
    let upper: u128 = counts[u.min(counts.len())..].iter().sum();
    let tail = lower.min(upper) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}

/// Normal-approximation p-value with continuity correction. `tie_term` is
/// Σ (t³ - t) over tie groups of the pooled sample.
pub fn normal_p_value(u: f64, n1: usize, n2: usize, tie_term: f64) -> (f64, f64) {
    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let mean = a * b / 2.0;
    let var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return (0.0, 1.0);
    }
    let diff = u - mean;
    let corrected = (libm::fabs(diff) - 0.5).max(0.0);
    let z = libm::copysign(corrected, diff) / libm::sqrt(var);
    (z, normal_two_sided_p(z))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn mann_whitney(group_a: &[f64], group_b: &[f64]) -> Result<RankTestResult, StatsError> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(StatsError::EmptyGroup);
    }
    if group_a.iter().chain(group_b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (n1, n2) = (group_a.len(), group_b.len());
    let pooled: Vec<f64> = group_a.iter().chain(group_b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum: f64 = ranks[..n1].iter().sum();
    let u = rank_sum - (n1 * (n1 + 1)) as f64 / 2.0;
    let (method, p_value) = if n1 + n2 <= EXACT_MAX_N && ties == 0.0 {
        (RankMethod::Exact, exact_p_value(u, n1, n2))
    } else {
        let (z, p) = normal_p_value(u, n1, n2, ties);
        (RankMethod::Normal { z }, p)
    };
    Ok(RankTestResult {
        u_statistic: u,
        method,
        p_value,
        group_means: [mean(group_a), mean(group_b)],
        group_ns: [n1, n2],
    })
}
