//! Gaussian kernel density estimation.

use crate::error::{Error, Result};
use crate::numerics::special::norm_pdf;

/// Normal-reference bandwidth `1.06 sigma n^{-1/5}`.
pub fn kde_bandwidth(data: &[f64]) -> Result<f64> {
    if data.len() < 2 {
        return Err(Error::domain("kde bandwidth needs at least 2 points"));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let sd = (data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::domain("kde bandwidth: data has zero spread"));
    }
    Ok(1.06 * sd * n.powf(-0.2))
}

/// Gaussian kernel density estimate `(1/nh) sum k((x_i - x)/h)` at `x`.
pub fn kde(data: &[f64], bandwidth: f64, x: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::domain("kde needs nonempty data"));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::domain(format!(
            "kde bandwidth must be > 0, got {bandwidth}"
        )));
    }
    let n = data.len() as f64;
    let sum: f64 = data.iter().map(|&xi| norm_pdf((xi - x) / bandwidth)).sum();
    Ok(sum / (n * bandwidth))
}
