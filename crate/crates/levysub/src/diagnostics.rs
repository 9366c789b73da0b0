//! Density-forecast diagnostics: probability integral transform,
//! Kolmogorov-Smirnov and Kuiper uniformity tests, the inverse-normal
//! transform, and the small-sample-adjusted Jarque-Bera normality test.

use crate::error::{Error, Result};
use crate::numerics::special::inv_norm_cdf;

/// Boundary clamp for PIT values: tabulated CDFs can return exactly 0 or 1
/// in the far tails.
pub const PIT_CLAMP: f64 = 1e-12;

/// Outcome of a statistical test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: &'static str,
}

/// Probability integral transform `u_i = F(x_i)`, clamped into
/// `[PIT_CLAMP, 1 - PIT_CLAMP]`.
///
/// The CDF must be strictly increasing across the data range; a flat region
/// spanning distinct observations is reported as an error.
pub fn pit<F: Fn(f64) -> f64>(cdf: F, data: &[f64]) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::domain("pit: data must be nonempty"));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&i, &j| data[i].total_cmp(&data[j]));
    let raw: Vec<f64> = data.iter().map(|&x| cdf(x)).collect();
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        if data[j] > data[i] && raw[j] <= raw[i] {
            return Err(Error::Inversion(format!(
                "cdf is not strictly increasing between x = {} and x = {}",
                data[i], data[j]
            )));
        }
    }
    Ok(raw
        .into_iter()
        .map(|u| u.clamp(PIT_CLAMP, 1.0 - PIT_CLAMP))
        .collect())
}

fn ecdf_extremes(u: &[f64]) -> Result<(f64, f64, usize)> {
    if u.len() < 5 {
        return Err(Error::domain("uniformity tests need n >= 5"));
    }
    if u.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::domain("uniformity tests: values must lie in [0,1]"));
    }
    let mut s = u.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let (mut dplus, mut dminus) = (0.0f64, 0.0f64);
    for (i, &x) in s.iter().enumerate() {
        dplus = dplus.max((i + 1) as f64 / n as f64 - x);
        dminus = dminus.max(x - i as f64 / n as f64);
    }
    Ok((dplus, dminus, n))
}

/// One-sample Kolmogorov-Smirnov test of uniformity on (0,1):
/// `D = sup |F_n(u) - u|` with the asymptotic Kolmogorov p-value under the
/// finite-n effective scaling.
pub fn ks_uniform_test(u: &[f64]) -> Result<TestResult> {
    let (dplus, dminus, n) = ecdf_extremes(u)?;
    let d = dplus.max(dminus);
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        n,
        method: "kolmogorov-smirnov",
    })
}

/// Survival function of the Kolmogorov distribution (dual theta series).
fn kolmogorov_q(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < 1.18 {
        let f = (2.0 * std::f64::consts::PI).sqrt() / z;
        let t = (-std::f64::consts::PI * std::f64::consts::PI / (8.0 * z * z)).exp();
        (1.0 - f * (t + t.powi(9) + t.powi(25) + t.powi(49))).clamp(0.0, 1.0)
    } else {
        let t = (-2.0 * z * z).exp();
        (2.0 * (t - t.powi(4) + t.powi(9))).clamp(0.0, 1.0)
    }
}

/// Kuiper test of uniformity: `V = D+ + D-`, p-value from the asymptotic
/// series with the finite-n second-order scaling.
pub fn kuiper_test(u: &[f64]) -> Result<TestResult> {
    let (dplus, dminus, n) = ecdf_extremes(u)?;
    let v = dplus + dminus;
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.155 + 0.24 / sqrt_n) * v;
    Ok(TestResult {
        statistic: v,
        p_value: kuiper_q(lambda),
        n,
        method: "kuiper",
    })
}

/// Survival function of the Kuiper statistic distribution,
/// `Q(z) = 2 sum_j (4 j^2 z^2 - 1) exp(-2 j^2 z^2)`.
fn kuiper_q(z: f64) -> f64 {
    if z < 0.1 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let a = (j * j) as f64 * z * z;
        let term = (4.0 * a - 1.0) * (-2.0 * a).exp();
        sum += term;
        if term.abs() < 1e-14 && j > 3 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Inverse-normal transform `z_i = Phi^{-1}(u_i)`; inputs are clamped away
/// from 0 and 1 by [`PIT_CLAMP`].
pub fn inverse_normal_transform(u: &[f64]) -> Result<Vec<f64>> {
    u.iter()
        .map(|&x| inv_norm_cdf(x.clamp(PIT_CLAMP, 1.0 - PIT_CLAMP)))
        .collect()
}

/// Small-sample-adjusted Jarque-Bera normality test: the skewness and
/// kurtosis terms are standardized by their exact finite-n means and
/// variances under normality, and the statistic referred to chi-squared(2).
pub fn adjusted_jarque_bera(z: &[f64]) -> Result<TestResult> {
    let n = z.len();
    if n < 8 {
        return Err(Error::domain("adjusted_jarque_bera needs n >= 8"));
    }
    let nf = n as f64;
    let mean = z.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in z {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if !(m2 > 0.0) {
        return Err(Error::domain("adjusted_jarque_bera: degenerate sample"));
    }
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    let var_skew = 6.0 * (nf - 2.0) / ((nf + 1.0) * (nf + 3.0));
    let mean_kurt = 3.0 * (nf - 1.0) / (nf + 1.0);
    let var_kurt = 24.0 * nf * (nf - 2.0) * (nf - 3.0)
        / ((nf + 1.0) * (nf + 1.0) * (nf + 3.0) * (nf + 5.0));
    let stat = skew * skew / var_skew + (kurt - mean_kurt) * (kurt - mean_kurt) / var_kurt;
    // chi-squared(2) survival function is exp(-x/2)
    let p = (-0.5 * stat).exp();
    Ok(TestResult {
        statistic: stat,
        p_value: p,
        n,
        method: "adjusted-jarque-bera",
    })
}
