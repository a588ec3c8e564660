use pvauction_core::stats::rank::{exact_p_value, normal_p_value};
use pvauction_core::stats::{mann_whitney, ols_normalized, RankMethod};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// U of the first group: pairs in which its value is the larger.
fn u_of(a: &[f64], b: &[f64]) -> usize {
    a.iter().map(|x| b.iter().filter(|y| x > y).count()).sum()
}

fn split(n: usize, mask: u32) -> (Vec<f64>, Vec<f64>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..n {
        // distinct, unevenly spaced values
        let v = (i * i) as f64 + 0.5 * i as f64;
        if mask >> i & 1 == 1 { a.push(v) } else { b.push(v) }
    }
    (a, b)
}

#[test]
fn exact_p_matches_full_enumeration() {
    let mut pairs = 0;
    for n in 2..=12usize {
        for n1 in 1..n {
            // null distribution of U by listing every assignment
            let masks: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() as usize == n1).collect();
            let us: Vec<usize> = masks.iter().map(|&m| { let (a, b) = split(n, m); u_of(&a, &b) }).collect();
            let total = us.len() as f64;
            for (&mask, &u) in masks.iter().zip(&us) {
                let lower = us.iter().filter(|&&v| v <= u).count() as f64 / total;
                let upper = us.iter().filter(|&&v| v >= u).count() as f64 / total;
                let expected = (2.0 * lower.min(upper)).min(1.0);
                let (a, b) = split(n, mask);
                let r = mann_whitney(&a, &b).unwrap();
                assert_eq!(r.method, RankMethod::Exact);
                assert_eq!(r.u_statistic, u as f64);
                assert!((r.p_value - expected).abs() < 1e-12, "n1={n1} n={n} mask={mask:b}: {} vs {expected}", r.p_value);
                pairs += 1;
            }
        }
    }
    assert!(pairs > 8_000);
}

#[test]
fn normal_approximation_tracks_exact_at_eight_and_eight() {
    let mut worst: f64 = 0.0;
    for mask in (0..1u32 << 16).filter(|m| m.count_ones() == 8) {
        let (a, b) = split(16, mask);
        let u = u_of(&a, &b) as f64;
        let exact = exact_p_value(u, 8, 8);
        let (_, approx) = normal_p_value(u, 8, 8, 0.0);
        worst = worst.max((exact - approx).abs());
    }
    assert!(worst <= 0.02, "largest gap {worst}");
}

fn covariates(n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let cost = Normal::new(0.55, 0.08).unwrap();
    let cover = Normal::new(4.0, 1.2).unwrap();
    (0..n).map(|_| (cost.sample(rng), cover.sample(rng))).unzip()
}

fn z(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    x.iter().map(|v| (v - m) / sd).collect()
}

/// Solves the 3x3 normal equations by Cramer's rule.
fn normal_equations(y: &[f64], x1: &[f64], x2: &[f64]) -> [f64; 3] {
    let cols = [vec![1.0; y.len()], x1.to_vec(), x2.to_vec()];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let m: Vec<Vec<f64>> = cols.iter().map(|c| cols.iter().map(|d| dot(c, d)).collect()).collect();
    let rhs: Vec<f64> = cols.iter().map(|c| dot(c, y)).collect();
    let det = |m: &[Vec<f64>]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut mk = m.clone();
        for (row, r) in mk.iter_mut().zip(&rhs) {
            row[k] = *r;
        }
        *slot = det(&mk) / d;
    }
    out
}

const PLANTED: [f64; 3] = [6.13, 1.70, -0.24];

#[test]
fn noiseless_fit_recovers_planted_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(185);
    let (cost, cover) = covariates(185, &mut rng);
    let (z1, z2) = (z(&cost), z(&cover));
    let y: Vec<f64> = (0..185).map(|i| PLANTED[0] + PLANTED[1] * z1[i] + PLANTED[2] * z2[i]).collect();
    let r = ols_normalized(&y, &cost, &cover).unwrap();
    for (got, want) in r.coefficients.iter().zip(PLANTED) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
    assert!((r.r_squared - 1.0).abs() < 1e-12);
    assert_eq!(r.df, 182);
}

#[test]
fn noisy_fits_recover_the_residual_spread() {
    let sigma = 0.247;
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut within = 0;
    let mut sum = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cost, cover) = covariates(185, &mut rng);
        let (z1, z2) = (z(&cost), z(&cover));
        let y: Vec<f64> =
            (0..185).map(|i| PLANTED[0] + PLANTED[1] * z1[i] + PLANTED[2] * z2[i] + noise.sample(&mut rng)).collect();
        let r = ols_normalized(&y, &cost, &cover).unwrap();
        let oracle = normal_equations(&y, &z1, &z2);
        for (got, want) in r.coefficients.iter().zip(oracle) {
            assert!((got - want).abs() < 1e-9);
        }
        let rss: f64 = (0..185).map(|i| (y[i] - oracle[0] - oracle[1] * z1[i] - oracle[2] * z2[i]).powi(2)).sum();
        assert!((r.residual_se - (rss / 182.0).sqrt()).abs() < 1e-9);
        if (r.residual_se - sigma).abs() <= 0.1 * sigma {
            within += 1;
        }
        sum += r.residual_se;
    }
    let mean = sum / 100.0;
    assert!((mean - sigma).abs() <= 0.1 * sigma, "mean residual SE {mean}");
    assert!(within >= 90, "{within}/100 seeds within 10%");
}
