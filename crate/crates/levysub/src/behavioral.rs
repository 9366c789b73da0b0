//! Probability weighting functions: the Tversky-Kahneman and Prelec forms,
//! the Gumbel CDF, and the general distribution-transform weighting that
//! links a base return law to a heavier-tailed one.

use crate::error::{Error, Result};
use crate::numerics::fft::DensityGrid;

/// Tversky-Kahneman weighting `u^g / (u^g + (1-u)^g)^{1/g}` for `g` in
/// `[0, 1]`; `g = 0` is the pointwise limit (0 on `[0,1)`, 1 at 1).
pub fn tk_pwf(gamma: f64, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!("tk_pwf: gamma must be in [0,1], got {gamma}")));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain(format!("tk_pwf: u must be in [0,1], got {u}")));
    }
    if u == 0.0 || u == 1.0 {
        return Ok(u);
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let ug = u.powf(gamma);
    let cg = (1.0 - u).powf(gamma);
    Ok(ug / (ug + cg).powf(1.0 / gamma))
}

/// Prelec weighting in its conventional form `exp(-delta (-ln u)^rho)`,
/// `delta > 0`, `rho` in `(0, 1]`; `rho = 1, delta = 1` is the identity.
pub fn prelec_pwf(delta: f64, rho: f64, u: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("prelec_pwf: delta must be > 0, got {delta}")));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::domain(format!("prelec_pwf: rho must be in (0,1], got {rho}")));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain(format!("prelec_pwf: u must be in [0,1], got {u}")));
    }
    if u == 0.0 {
        return Ok(0.0); // limiting value
    }
    Ok((-delta * (-u.ln()).powf(rho)).exp())
}

/// Gumbel CDF `exp(-exp(-(x - mu)/beta))`, `beta > 0`.
pub fn gumbel_cdf(mu: f64, beta: f64, x: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("gumbel_cdf: beta must be > 0, got {beta}")));
    }
    Ok((-(-(x - mu) / beta).exp()).exp())
}

/// General distribution-transform weighting `w(u) = F_S(F_R^inv(u))`, with
/// the quantile `F_R^inv(u) = min { x : F_R(x) > u }` found by bisection on
/// the tabulated CDF.
pub fn general_pwf(f_r: &DensityGrid, f_s: &DensityGrid, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "general_pwf: u must be in (0,1), got {u}"
        )));
    }
    let x = f_r.cdf_inv(u)?;
    Ok(f_s.cdf_at(x))
}
