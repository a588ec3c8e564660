//! Pearson product-moment correlation with a t test.

use super::dist::student_t_two_sided_p;
use super::StatsError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

pub fn pearson_test(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch);
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations { needed: 3, got: n });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    let t_statistic = if denom <= 0.0 { libm::copysign(f64::INFINITY, r) } else { r * libm::sqrt(df / denom) };
    Ok(CorrelationResult { r, t_statistic, p_value: student_t_two_sided_p(t_statistic, df), n })
}
