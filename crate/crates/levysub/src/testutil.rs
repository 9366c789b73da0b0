//! Monte Carlo statistics helpers shared by the test suites: batch-based
//! standard errors for moment estimates and a self-contained one-sample
//! Kolmogorov-Smirnov p-value.
//!
//! The KS code here is deliberately independent of [`crate::diagnostics`] so
//! it can serve as a cross-check oracle for that module.

/// Sample mean and its standard error.
pub fn mean_and_se(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Central moments (mean, m2, m3, m4) in one pass over the data.
pub fn central_moments(data: &[f64]) -> (f64, f64, f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in data {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

/// Sample skewness `m3 / m2^{3/2}`.
pub fn sample_skewness(data: &[f64]) -> f64 {
    let (_, m2, m3, _) = central_moments(data);
    m3 / m2.powf(1.5)
}

/// Sample excess kurtosis `m4 / m2^2 - 3`.
pub fn sample_excess_kurtosis(data: &[f64]) -> f64 {
    let (_, m2, _, m4) = central_moments(data);
    m4 / (m2 * m2) - 3.0
}

/// Full-sample moment estimates with batch-based standard errors.
///
/// The point estimates come from the full sample; the standard errors from
/// the spread of the statistic across `n_batches` disjoint sub-samples.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub skewness: f64,
    pub skewness_se: f64,
    pub excess_kurtosis: f64,
    pub excess_kurtosis_se: f64,
}

pub fn moments_with_se(data: &[f64], n_batches: usize) -> MomentEstimate {
    assert!(n_batches >= 2 && data.len() >= 2 * n_batches);
    let (mean, m2, m3, m4) = central_moments(data);
    let (_, mean_se) = mean_and_se(data);

    let batch = data.len() / n_batches;
    let stats: Vec<(f64, f64, f64)> = (0..n_batches)
        .map(|i| {
            let chunk = &data[i * batch..(i + 1) * batch];
            let (_, b2, b3, b4) = central_moments(chunk);
            (b2, b3 / b2.powf(1.5), b4 / (b2 * b2) - 3.0)
        })
        .collect();
    // sd(batch statistics)/sqrt(B) estimates the standard error of the
    // full-sample statistic
    let batch_se = |pick: fn(&(f64, f64, f64)) -> f64| {
        let vals: Vec<f64> = stats.iter().map(pick).collect();
        mean_and_se(&vals).1
    };
    let var_se = batch_se(|s| s.0);
    let skew_se = batch_se(|s| s.1);
    let kurt_se = batch_se(|s| s.2);
    MomentEstimate {
        mean,
        mean_se,
        variance: m2,
        variance_se: var_se,
        skewness: m3 / m2.powf(1.5),
        skewness_se: skew_se,
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        excess_kurtosis_se: kurt_se,
    }
}

/// One-sample KS test p-value of `data` against the CDF `cdf`, using the
/// asymptotic Kolmogorov distribution with the finite-n effective scaling.
pub fn ks_pvalue_against_cdf<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> f64 {
    let mut xs: Vec<f64> = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let hi = (i + 1) as f64 / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    kolmogorov_survival((n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d)
}

/// Survival function of the Kolmogorov distribution, Q(z) = P(K > z).
pub fn kolmogorov_survival(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < 1.18 {
        let factor = (2.0 * std::f64::consts::PI).sqrt() / z;
        let t = (-std::f64::consts::PI * std::f64::consts::PI / (8.0 * z * z)).exp();
        (1.0 - factor * (t + t.powi(9) + t.powi(25) + t.powi(49))).clamp(0.0, 1.0)
    } else {
        let t = (-2.0 * z * z).exp();
        (2.0 * (t - t.powi(4) + t.powi(9))).clamp(0.0, 1.0)
    }
}
