//! Characteristic-function density inversion on a uniform grid, plus the
//! CDF machinery built on top of the recovered density.
//!
//! The inversion computes `f(x) = (1/pi) Re int_0^Vmax e^{-ivx} phi(v) dv`
//! by a trapezoid-weighted DFT, so one FFT of size `grid_size` yields the
//! density on the whole x-grid. Sampling the frequency axis at spacing `dv`
//! periodizes the density with period `2 pi / dv`; the span therefore has to
//! cover essentially all of the mass, and the mass gates below report when
//! it does not.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// How the x-grid support is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpanRule {
    /// Infer center and half-width from the chf curvature at the origin
    /// (mean plus/minus 12 Gaussian-equivalent standard deviations). Fails
    /// for laws without a finite variance; those need [`SpanRule::Manual`].
    Auto,
    /// Explicit center and half-width in return units.
    Manual { center: f64, half_width: f64 },
}

/// Configuration for [`chf_to_pdf_fft`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FftConfig {
    /// Number of grid points; a power of two in `[2^8, 2^24]`.
    pub grid_size: usize,
    pub span: SpanRule,
    /// Exponential damping coefficient `eta >= 0`: the chf is multiplied by
    /// `exp(-eta |v|)` before inversion. Damping changes the recovered law
    /// and is an escape hatch only; the default is 0.
    pub damping: f64,
    /// Error if the post-clip mass deviates from 1 by more than this.
    /// Heavy-tailed laws whose tails cannot fit any uniform grid need an
    /// explicitly widened gate.
    pub mass_tolerance: f64,
    /// Error if more than this much negative ripple had to be clipped.
    pub clip_tolerance: f64,
}

impl Default for FftConfig {
    fn default() -> Self {
        FftConfig {
            grid_size: 1 << 14,
            span: SpanRule::Auto,
            damping: 0.0,
            mass_tolerance: 1e-2,
            clip_tolerance: 1e-3,
        }
    }
}

impl FftConfig {
    pub fn with_span(center: f64, half_width: f64) -> Self {
        FftConfig {
            span: SpanRule::Manual { center, half_width },
            ..Default::default()
        }
    }

    pub fn grid_size(mut self, n: usize) -> Self {
        self.grid_size = n;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.grid_size;
        if !n.is_power_of_two() || n < 256 || n > (1 << 24) {
            return Err(Error::domain(format!(
                "grid_size must be a power of two in [256, 2^24], got {n}"
            )));
        }
        if let SpanRule::Manual { half_width, .. } = self.span {
            if !(half_width > 0.0) {
                return Err(Error::domain("x_span half-width must be > 0"));
            }
        }
        if !(self.damping >= 0.0) {
            return Err(Error::domain("damping must be >= 0"));
        }
        Ok(())
    }
}

/// Uniformly spaced density samples with normalization metadata and the
/// cumulative distribution alongside.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    x0: f64,
    dx: f64,
    /// Normalized, nonnegative density values (trapezoid mass exactly 1).
    values: Vec<f64>,
    /// Cumulative trapezoid integral of `values`; 0 at the left edge, 1 at
    /// the right edge.
    cdf: Vec<f64>,
    /// Trapezoid mass of the clipped raw inversion before renormalization;
    /// `pdf_raw_at = pdf_at * raw_mass` recovers the un-normalized values.
    pub raw_mass: f64,
    /// Negative ripple mass removed by clipping.
    pub clipped_mass: f64,
}

impl DensityGrid {
    /// Build a grid from raw density samples (used by the inversion and by
    /// tests); clips negatives and renormalizes.
    pub fn from_samples(x0: f64, dx: f64, mut values: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) || values.len() < 2 {
            return Err(Error::domain("density grid needs dx > 0 and >= 2 points"));
        }
        let mut clipped = 0.0;
        for v in values.iter_mut() {
            if *v < 0.0 {
                clipped += -*v;
                *v = 0.0;
            }
        }
        let clipped_mass = clipped * dx;
        let raw_mass = trapezoid_mass(&values, dx);
        if !(raw_mass > 0.0) {
            return Err(Error::FftInversion("density mass is not positive".into()));
        }
        for v in values.iter_mut() {
            *v /= raw_mass;
        }
        let mut cdf = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * dx;
            cdf.push(acc);
        }
        // guard against rounding drift at the right edge
        let last = *cdf.last().unwrap();
        if (last - 1.0).abs() > 1e-9 {
            for c in cdf.iter_mut() {
                *c /= last;
            }
        }
        Ok(DensityGrid {
            x0,
            dx,
            values,
            cdf,
            raw_mass,
            clipped_mass,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }
    pub fn x_max(&self) -> f64 {
        self.x_at(self.values.len() - 1)
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// Normalized density at `x` by linear interpolation; 0 outside.
    pub fn pdf_at(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some((i, frac)) => self.values[i] * (1.0 - frac) + self.values[i + 1] * frac,
            None => 0.0,
        }
    }

    /// Un-renormalized density at `x` (the raw inversion values).
    pub fn pdf_raw_at(&self, x: f64) -> f64 {
        self.pdf_at(x) * self.raw_mass
    }

    /// Piecewise-linear CDF interpolation; clamps to 0 / 1 outside the grid.
    pub fn cdf_at(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some((i, frac)) => self.cdf[i] * (1.0 - frac) + self.cdf[i + 1] * frac,
            None => {
                if x < self.x0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Generalized inverse of [`Self::cdf_at`] by bisection to 1e-10 in x.
    pub fn cdf_inv(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!(
                "cdf_inv: u must be in (0,1), got {u}"
            )));
        }
        let (mut lo, mut hi) = (self.x0, self.x_max());
        if self.cdf_at(lo) > u || self.cdf_at(hi) < u {
            return Err(Error::Inversion(format!(
                "quantile {u} cannot be bracketed by the density grid"
            )));
        }
        while hi - lo > 1e-10 * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if self.cdf_at(mid) > u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let t = (x - self.x0) / self.dx;
        if !(t >= 0.0) || t > (self.values.len() - 1) as f64 {
            return None;
        }
        let i = (t as usize).min(self.values.len() - 2);
        Some((i, t - i as f64))
    }
}

fn trapezoid_mass(values: &[f64], dx: f64) -> f64 {
    let sum: f64 = values.iter().sum();
    (sum - 0.5 * (values[0] + values[values.len() - 1])) * dx
}

/// Invert a characteristic function into a [`DensityGrid`].
///
/// `chf` must satisfy `chf(0) = 1` and conjugate symmetry (any proper chf
/// does); only nonnegative frequencies are evaluated.
pub fn chf_to_pdf_fft<F: Fn(f64) -> Complex64>(chf: F, cfg: &FftConfig) -> Result<DensityGrid> {
    cfg.validate()?;
    let phi0 = chf(0.0);
    if (phi0 - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::domain(format!(
            "chf(0) must equal 1, got {phi0}"
        )));
    }
    let (center, half_width) = match cfg.span {
        SpanRule::Manual { center, half_width } => (center, half_width),
        SpanRule::Auto => auto_span(&chf)?,
    };
    let n = cfg.grid_size;
    let x0 = center - half_width;
    let dx = 2.0 * half_width / n as f64;
    let dv = 2.0 * std::f64::consts::PI / (n as f64 * dx);

    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let v = k as f64 * dv;
            let weight = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            let damp = (-cfg.damping * v).exp();
            // e^{-i v x0} shifts the transform onto the grid origin
            let shift = Complex64::from_polar(1.0, -v * x0);
            chf(v) * (weight * damp) * shift
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = dv / std::f64::consts::PI;
    let values: Vec<f64> = buf.iter().map(|z| z.re * scale).collect();

    let grid = DensityGrid::from_samples(x0, dx, values)?;
    if grid.clipped_mass > cfg.clip_tolerance {
        return Err(Error::FftInversion(format!(
            "clipped negative mass {:.3e} exceeds {:.1e}; the grid or damping is misconfigured",
            grid.clipped_mass, cfg.clip_tolerance
        )));
    }
    if (grid.raw_mass - 1.0).abs() > cfg.mass_tolerance {
        return Err(Error::FftInversion(format!(
            "grid mass {:.6} deviates from 1 beyond {:.1e}; widen the span or grid",
            grid.raw_mass, cfg.mass_tolerance
        )));
    }
    // frequency sampling periodizes the density, which preserves mass even
    // when the span is far too narrow; a non-vanishing edge density is the
    // reliable symptom of that failure mode
    let edge = grid.values()[0].max(grid.values()[grid.len() - 1]) * grid.raw_mass;
    if edge * 2.0 * half_width > cfg.mass_tolerance {
        return Err(Error::FftInversion(format!(
            "density does not vanish at the grid edges (edge mass score {:.3e}); widen the span",
            edge * 2.0 * half_width
        )));
    }
    Ok(grid)
}

/// Gaussian-equivalent (mean, sd) read off the chf near the origin:
/// `ln phi(h) ~ i mean h - sd^2 h^2 / 2`.
fn curvature_probe<F: Fn(f64) -> Complex64>(chf: &F, h: f64) -> (f64, f64) {
    let k = chf(h).ln();
    let mean = k.im / h;
    let var = -2.0 * k.re / (h * h);
    (mean, var)
}

fn auto_span<F: Fn(f64) -> Complex64>(chf: &F) -> Result<(f64, f64)> {
    // find a probe scale where ln phi is resolvable but far from winding
    let mut h = 1e-8;
    let mut found = None;
    while h <= 1e8 {
        let k = chf(h).ln();
        if k.re.is_finite() && (1e-10..=0.1).contains(&(-k.re)) && k.im.abs() < 0.5 {
            found = Some(h);
            break;
        }
        h *= 10.0;
    }
    let h0 = found.ok_or_else(|| {
        Error::FftInversion(
            "auto span probe failed; set the span explicitly for this law".into(),
        )
    })?;
    let (mut mean, mut var) = curvature_probe(chf, h0);
    for _ in 0..2 {
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::FftInversion(
                "auto span: nonpositive curvature; set the span explicitly".into(),
            ));
        }
        let h_new = (0.2 / var.sqrt()).min(std::f64::consts::PI / (4.0 * mean.abs() + 1e-30));
        let probe = curvature_probe(chf, h_new);
        mean = probe.0;
        var = probe.1;
    }
    // stability check: halving the probe step must roughly agree, otherwise
    // the law has no usable variance (heavy tails) and needs a manual span
    let h_final = 0.2 / var.sqrt();
    let (_, var_half) = curvature_probe(chf, h_final / 2.0);
    if !(var > 0.0) || !(var_half > 0.0) || (var_half / var > 1.5) || (var_half / var < 0.666) {
        return Err(Error::FftInversion(
            "auto span: curvature unstable (undefined variance?); set the span explicitly"
                .into(),
        ));
    }
    Ok((mean, 12.0 * var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::norm_pdf;

    fn normal_chf(v: f64) -> Complex64 {
        Complex64::new((-0.5 * v * v).exp(), 0.0)
    }

    #[test]
    fn normal_density_at_origin() {
        let cfg = FftConfig::with_span(0.0, 8.0);
        let grid = chf_to_pdf_fft(normal_chf, &cfg).unwrap();
        let got = grid.pdf_at(0.0);
        assert!(
            (got - 0.398_942_280_401_432_7).abs() < 1e-5,
            "pdf(0) = {got}"
        );
        assert!((grid.raw_mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn normal_density_auto_span() {
        let cfg = FftConfig::default();
        let grid = chf_to_pdf_fft(normal_chf, &cfg).unwrap();
        // interior 80% of the grid against the closed form, at grid points
        let n = grid.len();
        let mut sup = 0.0f64;
        for i in n / 10..9 * n / 10 {
            let x = grid.x_at(i);
            sup = sup.max((grid.values()[i] - norm_pdf(x)).abs());
        }
        assert!(sup < 1e-4, "sup err {sup}");
    }

    #[test]
    fn shifted_scaled_normal_auto_span() {
        // mean 3, sd 0.25
        let chf = |v: f64| {
            Complex64::from_polar((-0.5 * 0.0625 * v * v).exp(), 3.0 * v)
        };
        let grid = chf_to_pdf_fft(chf, &FftConfig::default()).unwrap();
        let got = grid.pdf_at(3.0);
        let want = norm_pdf(0.0) / 0.25;
        assert!((got - want).abs() < 1e-4 * want, "{got} vs {want}");
    }

    #[test]
    fn doubling_grid_size_reduces_error_monotonically() {
        // span wide enough that frequency truncation dominates at small n
        let mut errs = Vec::new();
        for &n in &[256usize, 512, 1024] {
            let cfg = FftConfig {
                grid_size: n,
                span: SpanRule::Manual {
                    center: 0.0,
                    half_width: 268.0,
                },
                // the coarsest grid rings visibly; the gates are deliberately
                // open so the convergence itself is what gets asserted
                mass_tolerance: 1.0,
                clip_tolerance: 1.0,
                ..Default::default()
            };
            let grid = chf_to_pdf_fft(normal_chf, &cfg).unwrap();
            let m = grid.len();
            let mut sup = 0.0f64;
            for i in m / 10..9 * m / 10 {
                let x = grid.x_at(i);
                sup = sup.max((grid.values()[i] - norm_pdf(x)).abs());
            }
            errs.push(sup);
        }
        assert!(
            errs[1] <= errs[0] + 1e-12 && errs[2] <= errs[1] + 1e-12,
            "errors {errs:?}"
        );
        assert!(errs[0] > 1e-6, "first grid should be visibly truncated");
    }

    #[test]
    fn levy_stable_closed_form_route() {
        use crate::subordinators::{levy_stable_pdf, LevyStableParams};
        let p = LevyStableParams::new(1.0).unwrap();
        let chf = |v: f64| {
            // exp(-sqrt(-2 b i v)) continued from v = 0
            let w = Complex64::new(0.0, v);
            (-(-2.0 * p.b * w).sqrt()).exp()
        };
        let cfg = FftConfig {
            grid_size: 1 << 20,
            span: SpanRule::Manual {
                center: 3900.0,
                half_width: 4000.0,
            },
            ..Default::default()
        };
        let grid = chf_to_pdf_fft(chf, &cfg).unwrap();
        // compare at grid points inside [0.1, 10]
        let mut sup = 0.0f64;
        let mut checked = 0;
        for i in 0..grid.len() {
            let x = grid.x_at(i);
            if x < 0.1 || x > 10.0 {
                continue;
            }
            checked += 1;
            let want = levy_stable_pdf(&p, x).unwrap();
            sup = sup.max((grid.pdf_raw_at(x) - want).abs());
        }
        assert!(checked > 100);
        assert!(sup < 1e-4, "sup err {sup}");
    }

    #[test]
    fn cdf_round_trip_and_median() {
        let grid = chf_to_pdf_fft(normal_chf, &FftConfig::with_span(0.0, 8.0)).unwrap();
        assert!(grid.cdf_at(grid.x0()) < 1e-9);
        assert!((grid.cdf_at(grid.x_max()) - 1.0).abs() < 1e-9);
        let med = grid.cdf_inv(0.5).unwrap();
        assert!(med.abs() < grid.dx(), "median {med}");
        for &u in &[0.05, 0.3, 0.5, 0.9, 0.99] {
            let x = grid.cdf_inv(u).unwrap();
            let back = grid.cdf_at(x);
            assert!((back - u).abs() < 1e-8, "u={u}: {back}");
        }
        for i in [grid.len() / 5, grid.len() / 2, 4 * grid.len() / 5] {
            let x = grid.x_at(i);
            let u = grid.cdf_at(x);
            if u > 1e-9 && u < 1.0 - 1e-9 {
                let back = grid.cdf_inv(u).unwrap();
                assert!((back - x).abs() < grid.dx(), "round trip at x={x}");
            }
        }
        assert!(grid.cdf_inv(0.0).is_err());
        assert!(grid.cdf_inv(1.0).is_err());
    }

    #[test]
    fn cdf_is_nondecreasing() {
        let grid = chf_to_pdf_fft(normal_chf, &FftConfig::default()).unwrap();
        for w in grid.cdf_values().windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn bad_span_is_reported() {
        // a span far too narrow for a standard normal
        let cfg = FftConfig::with_span(0.0, 0.5);
        match chf_to_pdf_fft(normal_chf, &cfg) {
            Err(Error::FftInversion(_)) => {}
            other => panic!("expected inversion failure, got {other:?}"),
        }
    }

    #[test]
    fn auto_span_rejects_undefined_variance() {
        // chf of a law with infinite variance: exp(-|v|^{1/2})
        let chf = |v: f64| Complex64::new((-(v.abs()).sqrt()).exp(), 0.0);
        match chf_to_pdf_fft(chf, &FftConfig::default()) {
            Err(Error::FftInversion(msg)) => {
                assert!(msg.contains("span"), "{msg}");
            }
            other => panic!("expected span failure, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = FftConfig::default();
        cfg.grid_size = 300;
        assert!(chf_to_pdf_fft(normal_chf, &cfg).is_err());
        cfg.grid_size = 128;
        assert!(chf_to_pdf_fft(normal_chf, &cfg).is_err());
        let cfg = FftConfig {
            damping: -1.0,
            ..Default::default()
        };
        assert!(chf_to_pdf_fft(normal_chf, &cfg).is_err());
    }
}
