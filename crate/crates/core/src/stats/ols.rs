//! Least squares on z-normalised regressors via Householder QR.

use alloc::vec;
use alloc::vec::Vec;

use super::dist::{f_upper_tail, student_t_two_sided_p};
use super::StatsError;

/// Relative pivot size below which the design is treated as rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionResult {
    /// Intercept first, then one coefficient per regressor in input order.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub residual_se: f64,
    pub df: usize,
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub n: usize,
}

impl RegressionResult {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// (x - mean) / sd with the sample standard deviation.
pub fn z_scores(x: &[f64]) -> Result<Vec<f64>, StatsError> {
    if x.len() < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: x.len() });
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64;
    let sd = libm::sqrt(var);
    if !(sd > 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    Ok(x.iter().map(|v| (v - m) / sd).collect())
}

/// Ordinary least squares of `y` on an intercept and `regressors`.
pub fn ols(y: &[f64], regressors: &[&[f64]]) -> Result<RegressionResult, StatsError> {
    let n = y.len();
    let p = regressors.len() + 1;
    if regressors.iter().any(|r| r.len() != n) {
        return Err(StatsError::LengthMismatch);
    }
    if n <= p {
        return Err(StatsError::TooFewObservations { needed: p + 1, got: n });
    }
    if y.iter().chain(regressors.iter().flat_map(|r| r.iter())).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }

    // column-major design matrix, reduced in place to R
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(p);
    a.push(vec![1.0; n]);
    for r in regressors {
        a.push(r.to_vec());
    }
    let mut qty = y.to_vec();
    let col_norm_max = a.iter().map(|c| libm::sqrt(c.iter().map(|v| v * v).sum())).fold(0.0, f64::max);
    for k in 0..p {
        let norm = libm::sqrt(a[k][k..].iter().map(|v| v * v).sum());
        if norm <= RANK_TOLERANCE * col_norm_max {
            return Err(StatsError::Collinear);
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                let dot: f64 = v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum();
                let s = 2.0 * dot / vnorm2;
                for (c, vi) in col[k..].iter_mut().zip(&v) {
                    *c -= s * vi;
                }
            }
            let dot: f64 = v.iter().zip(&qty[k..]).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, vi) in qty[k..].iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        if libm::fabs(a[k][k]) <= RANK_TOLERANCE * col_norm_max {
            return Err(StatsError::Collinear);
        }
    }

    // back substitution R b = Q'y
    let r = |i: usize, j: usize| a[j][i];
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = ((i + 1)..p).map(|j| r(i, j) * beta[j]).sum();
        beta[i] = (qty[i] - s) / r(i, i);
    }
    // R^-1, upper triangular
    let mut rinv = vec![vec![0.0; p]; p];
    for j in 0..p {
        rinv[j][j] = 1.0 / r(j, j);
        for i in (0..j).rev() {
            let s: f64 = ((i + 1)..=j).map(|k| r(i, k) * rinv[k][j]).sum();
            rinv[i][j] = -s / r(i, i);
        }
    }

    let fitted: Vec<f64> = (0..n)
        .map(|i| beta[0] + regressors.iter().zip(&beta[1..]).map(|(x, b)| x[i] * b).sum::<f64>())
        .collect();
    let ssr: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    let my = mean(y);
    let sst: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let df = n - p;
    let sigma2 = ssr / df as f64;
    let r_squared = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { 0.0 };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) as f64 / df as f64;
    let k = (p - 1) as f64;
    let f_statistic = if sst <= 0.0 {
        0.0
    } else if ssr <= 0.0 {
        f64::INFINITY
    } else {
        (r_squared / k) / ((1.0 - r_squared) / df as f64)
    };

    let mut std_errors = Vec::with_capacity(p);
    let mut t_values = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for i in 0..p {
        // (X'X)^-1 = R^-1 R^-T, diagonal entry i
        let d: f64 = rinv[i].iter().map(|v| v * v).sum();
        let se = libm::sqrt(sigma2 * d);
        let t = if se > 0.0 {
            beta[i] / se
        } else if beta[i] == 0.0 {
            0.0
        } else {
            libm::copysign(f64::INFINITY, beta[i])
        };
        std_errors.push(se);
        t_values.push(t);
        p_values.push(if t == 0.0 { 1.0 } else { student_t_two_sided_p(t, df as f64) });
    }
    Ok(RegressionResult {
        coefficients: beta,
        std_errors,
        t_values,
        p_values,
        r_squared,
        adj_r_squared,
        residual_se: libm::sqrt(sigma2),
        df,
        f_statistic,
        f_p_value: f_upper_tail(f_statistic, k, df as f64),
        n,
    })
}

/// Regresses bid values on the z-normalised cost index and bid-to-cover
/// ratio. Coefficients: intercept, cost index, bid-to-cover.
pub fn ols_normalized(bid_values: &[f64], pvc6: &[f64], bcr: &[f64]) -> Result<RegressionResult, StatsError> {
    if pvc6.len() != bid_values.len() || bcr.len() != bid_values.len() {
        return Err(StatsError::LengthMismatch);
    }
    if bid_values.len() < 4 {
        return Err(StatsError::TooFewObservations { needed: 4, got: bid_values.len() });
    }
    let z1 = z_scores(pvc6).map_err(|_| StatsError::Collinear)?;
    let z2 = z_scores(bcr).map_err(|_| StatsError::Collinear)?;
    ols(bid_values, &[&z1, &z2])
}
