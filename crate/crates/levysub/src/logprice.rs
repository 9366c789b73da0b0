//! Unit-increment return distributions of subordinated log-price processes.
//!
//! A return law is built from an intrinsic-time chain plus a drift, per-level
//! loadings, and a diffusion scale: with levels `L_1 .. L_n` in generation
//! order (`L_1` drawn first, each next level clocked by the previous value,
//! the Brownian motion clocked by the last),
//!
//! ```text
//! R = mu + sum_k load_k W_k + sigma B(W_n),   W_k = L_k(W_{k-1}), W_0 = 1.
//! ```
//!
//! The characteristic function follows by chaining cumulant transforms from
//! the innermost level outward; the two-level laws also carry literal
//! closed-form transforms used as an independent route in tests.

use crate::compound::{BaseLaw, CumulantSet, Moments};
use crate::error::{Error, Result};
use crate::numerics::fft::{chf_to_pdf_fft, DensityGrid, FftConfig};
use crate::numerics::quad::adaptive_quad;
use crate::numerics::special::{bessel_k1_scaled, ln_gamma};
use crate::subordinators::{GammaParams, IGParams, LevyStableParams};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

/// Drift, loadings and diffusion scale of a two-level log-price unit
/// increment `R = mu + gamma U(1) + rho V(1) + sigma B(V(1))` with
/// `V(1) = T(U(1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPriceParams {
    pub mu: f64,
    pub gamma: f64,
    pub rho: f64,
    pub sigma: f64,
}

impl LogPriceParams {
    pub fn new(mu: f64, gamma: f64, rho: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() || !gamma.is_finite() || !rho.is_finite() {
            return Err(Error::domain(format!(
                "log-price parameters must be finite with sigma > 0 (sigma = {sigma})"
            )));
        }
        Ok(Self {
            mu,
            gamma,
            rho,
            sigma,
        })
    }
}

/// One level of the intrinsic-time chain together with its return loading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub law: BaseLaw,
    pub loading: f64,
}

/// Family tag of a return law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Normal-compound-Levy-stable (two 1/2-stable levels). No moments.
    Ncls,
    /// Normal-compound(n)-stable, n >= 2. No moments.
    NcnStable,
    /// Variance-gamma-gamma (two gamma levels).
    Vgg,
    /// n-fold gamma chain, n >= 2.
    VggMulti,
    /// Normal-compound-inverse-Gaussian (two IG levels).
    Ncig,
    /// n-fold IG chain, n >= 2.
    NcigMulti,
}

/// A moment that may be closed-form, numeric-only, or undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaggedValue {
    Closed(f64),
    Numeric(f64),
    Undefined,
}

impl TaggedValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            TaggedValue::Closed(v) | TaggedValue::Numeric(v) => Some(*v),
            TaggedValue::Undefined => None,
        }
    }
}

/// Moment report of a return law; stable families answer `Undefined` for
/// every entry rather than producing numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedMoments {
    pub mean: TaggedValue,
    pub variance: TaggedValue,
    pub skewness: TaggedValue,
    pub excess_kurtosis: TaggedValue,
}

/// A fully specified return law: family tag, drift/diffusion, and the
/// intrinsic-time levels in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnLaw {
    family: Family,
    mu: f64,
    sigma: f64,
    levels: Vec<Level>,
}

impl ReturnLaw {
    /// Normal-compound-Levy-stable law: `t` clocks the Brownian motion (rho
    /// loading), `u` is the first-drawn volatility level (gamma loading).
    pub fn ncls(
        p: &LogPriceParams,
        t: &LevyStableParams,
        u: &LevyStableParams,
    ) -> Result<Self> {
        Ok(ReturnLaw {
            family: Family::Ncls,
            mu: p.mu,
            sigma: p.sigma,
            levels: vec![
                Level {
                    law: BaseLaw::LevyStable(*u),
                    loading: p.gamma,
                },
                Level {
                    law: BaseLaw::LevyStable(*t),
                    loading: p.rho,
                },
            ],
        })
    }

    /// Normal-compound(n)-stable law; `levels` in generation order.
    pub fn ncn_stable(
        mu: f64,
        sigma: f64,
        levels: &[(LevyStableParams, f64)],
    ) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::domain("n-fold stable law needs n >= 2 levels"));
        }
        Ok(ReturnLaw {
            family: Family::NcnStable,
            mu,
            sigma: positive_sigma(sigma)?,
            levels: levels
                .iter()
                .map(|(p, loading)| Level {
                    law: BaseLaw::LevyStable(*p),
                    loading: *loading,
                })
                .collect(),
        })
    }

    /// Variance-gamma-gamma law.
    pub fn vgg(p: &LogPriceParams, t: &GammaParams, u: &GammaParams) -> Result<Self> {
        Ok(ReturnLaw {
            family: Family::Vgg,
            mu: p.mu,
            sigma: p.sigma,
            levels: vec![
                Level {
                    law: BaseLaw::Gamma(*u),
                    loading: p.gamma,
                },
                Level {
                    law: BaseLaw::Gamma(*t),
                    loading: p.rho,
                },
            ],
        })
    }

    /// n-fold gamma law; `levels` in generation order.
    pub fn vgg_multi(mu: f64, sigma: f64, levels: &[(GammaParams, f64)]) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::domain("n-fold gamma law needs n >= 2 levels"));
        }
        Ok(ReturnLaw {
            family: Family::VggMulti,
            mu,
            sigma: positive_sigma(sigma)?,
            levels: levels
                .iter()
                .map(|(p, loading)| Level {
                    law: BaseLaw::Gamma(*p),
                    loading: *loading,
                })
                .collect(),
        })
    }

    /// Normal-compound-inverse-Gaussian law.
    pub fn ncig(p: &LogPriceParams, t: &IGParams, u: &IGParams) -> Result<Self> {
        Ok(ReturnLaw {
            family: Family::Ncig,
            mu: p.mu,
            sigma: p.sigma,
            levels: vec![
                Level {
                    law: BaseLaw::Ig(*u),
                    loading: p.gamma,
                },
                Level {
                    law: BaseLaw::Ig(*t),
                    loading: p.rho,
                },
            ],
        })
    }

    /// n-fold IG law; `levels` in generation order.
    pub fn ncig_multi(mu: f64, sigma: f64, levels: &[(IGParams, f64)]) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::domain("n-fold IG law needs n >= 2 levels"));
        }
        Ok(ReturnLaw {
            family: Family::NcigMulti,
            mu,
            sigma: positive_sigma(sigma)?,
            levels: levels
                .iter()
                .map(|(p, loading)| Level {
                    law: BaseLaw::Ig(*p),
                    loading: *loading,
                })
                .collect(),
        })
    }

    /// Single-subordinated law `mu + gamma U(1) + sigma B(U(1))` (the
    /// pre-compounding benchmark used by weighting-function constructions).
    pub fn single_ig(mu: f64, gamma: f64, sigma: f64, u: &IGParams) -> Result<Self> {
        Ok(ReturnLaw {
            family: Family::Ncig,
            mu,
            sigma: positive_sigma(sigma)?,
            levels: vec![Level {
                law: BaseLaw::Ig(*u),
                loading: gamma,
            }],
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Characteristic function by inner-to-outer cumulant-transform
    /// recursion; supports any depth and any mix of level laws.
    pub fn chf(&self, v: f64) -> Complex64 {
        let iv = Complex64::new(0.0, v);
        let last = self.levels.len() - 1;
        let mut w = iv * self.levels[last].loading - 0.5 * v * v * self.sigma * self.sigma;
        w = self.levels[last].law.cumulant_transform(w);
        for level in self.levels[..last].iter().rev() {
            w = iv * level.loading + w;
            w = level.law.cumulant_transform(w);
        }
        (iv * self.mu + w).exp()
    }

    /// First four cumulants when every level law has them; stable levels
    /// yield `Err(MomentsUndefined)`.
    pub(crate) fn cumulants(&self) -> Result<CumulantSet> {
        let last = self.levels.len() - 1;
        let mut acc = CumulantSet::new(
            self.levels[last].loading,
            self.sigma * self.sigma,
            0.0,
            0.0,
        );
        acc = acc.subordinate_by(&self.levels[last].law.unit_cumulants()?);
        for level in self.levels[..last].iter().rev() {
            acc = CumulantSet::new(acc.kappa1 + level.loading, acc.kappa2, acc.kappa3, acc.kappa4);
            acc = acc.subordinate_by(&level.law.unit_cumulants()?);
        }
        Ok(CumulantSet::new(
            acc.kappa1 + self.mu,
            acc.kappa2,
            acc.kappa3,
            acc.kappa4,
        ))
    }

    /// Tagged moment report. Stable families are `Undefined` everywhere;
    /// IG families report a numeric (chf-derived) excess kurtosis since only
    /// the first three moments have closed forms there.
    pub fn moments(&self) -> TaggedMoments {
        match self.family {
            Family::Ncls | Family::NcnStable => TaggedMoments {
                mean: TaggedValue::Undefined,
                variance: TaggedValue::Undefined,
                skewness: TaggedValue::Undefined,
                excess_kurtosis: TaggedValue::Undefined,
            },
            Family::Vgg | Family::VggMulti => {
                let c = self.cumulants().expect("gamma levels have cumulants");
                TaggedMoments {
                    mean: TaggedValue::Closed(c.mean()),
                    variance: TaggedValue::Closed(c.variance()),
                    skewness: TaggedValue::Closed(c.skewness()),
                    excess_kurtosis: TaggedValue::Closed(c.excess_kurtosis()),
                }
            }
            Family::Ncig | Family::NcigMulti => {
                let c = self.cumulants().expect("IG levels have cumulants");
                let k4 = self.chf_excess_kurtosis(&c);
                TaggedMoments {
                    mean: TaggedValue::Closed(c.mean()),
                    variance: TaggedValue::Closed(c.variance()),
                    skewness: TaggedValue::Closed(c.skewness()),
                    excess_kurtosis: TaggedValue::Numeric(k4),
                }
            }
        }
    }

    /// Excess kurtosis from central differences of `ln chf` at the origin.
    fn chf_excess_kurtosis(&self, c: &CumulantSet) -> f64 {
        let scale = c.variance().sqrt();
        let h = 0.05 / scale;
        let k = |v: f64| self.chf(v).ln();
        let k4 = 2.0 * (k(2.0 * h).re - 4.0 * k(h).re) / h.powi(4);
        k4 / (c.variance() * c.variance())
    }

    /// Density grid by chf inversion. Laws without usable variance (the
    /// stable families) need a manual span in `cfg`.
    pub fn pdf_grid(&self, cfg: &FftConfig) -> Result<DensityGrid> {
        chf_to_pdf_fft(|v| self.chf(v), cfg)
    }

    /// i.i.d. draws of the unit-increment return.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut acc = self.mu;
                let mut t = 1.0;
                for level in &self.levels {
                    t = level.law.draw_at(t, &mut rng);
                    acc += level.loading * t;
                }
                let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                acc + self.sigma * t.sqrt() * z
            })
            .collect()
    }
}

fn positive_sigma(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(sigma)
}

// ---------------------------------------------------------------------------
// Literal two-level transforms (independent of the recursion engine).
// ---------------------------------------------------------------------------

/// Literal normal-compound-Levy-stable chf:
/// `exp(iv mu) exp(-sqrt(-2 b_U (iv gamma - sqrt(-2 b_T (iv rho - v^2 sigma^2 / 2)))))`.
pub fn ncls_chf(
    p: &LogPriceParams,
    t: &LevyStableParams,
    u: &LevyStableParams,
    v: f64,
) -> Complex64 {
    let iv = Complex64::new(0.0, v);
    let inner = iv * p.rho - 0.5 * v * v * p.sigma * p.sigma;
    let psi_t = (-2.0 * t.b * inner).sqrt();
    let outer = iv * p.gamma - psi_t;
    let psi_u = (-2.0 * u.b * outer).sqrt();
    (iv * p.mu - psi_u).exp()
}

/// Normal-compound(n)-stable chf by the loading recursion; `levels` in
/// generation order (first-drawn level first), n >= 2.
pub fn ncn_stable_chf(
    mu: f64,
    sigma: f64,
    levels: &[(LevyStableParams, f64)],
    v: f64,
) -> Result<Complex64> {
    Ok(ReturnLaw::ncn_stable(mu, sigma, levels)?.chf(v))
}

/// Direct single-integral density of the normal-compound-Levy-stable law
/// (Bessel-kernel representation); requires `rho != 0`, the fall-back for
/// `rho = 0` being the FFT route.
pub fn ncls_pdf_direct(
    p: &LogPriceParams,
    t: &LevyStableParams,
    u: &LevyStableParams,
    x: f64,
) -> Result<f64> {
    if p.rho == 0.0 {
        return Err(Error::domain(
            "ncls_pdf_direct needs rho != 0; use the FFT route instead",
        ));
    }
    let (s2, rho) = (p.sigma * p.sigma, p.rho);
    let abs_rho = rho.abs();
    let ln_front = (2.0 * abs_rho * (t.b * u.b).sqrt()).ln()
        - (p.sigma * (2.0 * std::f64::consts::PI).powf(1.5)).ln();
    let f = |y: f64| {
        let uu = y.exp();
        if uu == 0.0 || !uu.is_finite() {
            return 0.0;
        }
        let z = x - p.mu - p.gamma * uu;
        let q = (z * z + t.b * s2 * uu * uu).sqrt();
        let a = abs_rho * q / s2;
        let k1s = match bessel_k1_scaled(a) {
            Ok(v) => v,
            Err(_) => return 0.0,
        };
        let ln_val = z * rho / s2 - u.b / (2.0 * uu) - a + k1s.ln() - 0.5 * y - q.ln() + y;
        (ln_front + ln_val).exp()
    };
    let r = adaptive_quad(f, f64::NEG_INFINITY, f64::INFINITY, 1e-10, 1e-7)?;
    Ok(r.value.max(0.0))
}

/// Literal variance-gamma-gamma chf:
/// `exp(iv mu) (1 - iv gamma/lambda_U + (alpha_T/lambda_U) ln(1 - iv rho/lambda_T + v^2 sigma^2/(2 lambda_T)))^{-alpha_U}`.
pub fn vgg_chf(p: &LogPriceParams, t: &GammaParams, u: &GammaParams, v: f64) -> Complex64 {
    let iv = Complex64::new(0.0, v);
    let inner = Complex64::new(1.0, 0.0) - iv * p.rho / t.lambda
        + 0.5 * v * v * p.sigma * p.sigma / t.lambda;
    let outer = Complex64::new(1.0, 0.0) - iv * p.gamma / u.lambda
        + t.alpha / u.lambda * inner.ln();
    (iv * p.mu).exp() * outer.powf(-u.alpha)
}

/// Literal variance-gamma-gamma MGF, valid while both the inner quadratic
/// and the outer bracket stay positive.
pub fn vgg_mgf(p: &LogPriceParams, t: &GammaParams, u: &GammaParams, v: f64) -> Result<f64> {
    let inner = 1.0 - p.rho * v / t.lambda - 0.5 * p.sigma * p.sigma * v * v / t.lambda;
    if !(inner > 0.0) {
        return Err(Error::domain(format!(
            "vgg_mgf: inner bracket nonpositive at v = {v}"
        )));
    }
    let outer = 1.0 - p.gamma * v / u.lambda + t.alpha / u.lambda * inner.ln();
    if !(outer > 0.0) {
        return Err(Error::domain(format!(
            "vgg_mgf: outer bracket nonpositive at v = {v}"
        )));
    }
    Ok((p.mu * v).exp() * outer.powf(-u.alpha))
}

/// n-fold gamma log-price chf (nested logarithms, evaluated inner-to-outer);
/// `levels` in generation order, n >= 2.
pub fn multi_vgg_chf(
    mu: f64,
    sigma: f64,
    levels: &[(GammaParams, f64)],
    v: f64,
) -> Result<Complex64> {
    Ok(ReturnLaw::vgg_multi(mu, sigma, levels)?.chf(v))
}

/// Closed-form variance-gamma-gamma moments via cumulant composition.
pub fn vgg_moments(p: &LogPriceParams, t: &GammaParams, u: &GammaParams) -> Moments {
    let law = ReturnLaw::vgg(p, t, u).expect("validated");
    law.cumulants().expect("gamma cumulants exist").moments()
}

/// Direct double-integral density of the variance-gamma-gamma law (normal
/// mixture over the gamma clock of a gamma clock). A slow oracle.
pub fn vgg_pdf_direct(
    p: &LogPriceParams,
    t: &GammaParams,
    u: &GammaParams,
    x: f64,
) -> Result<f64> {
    let s2 = p.sigma * p.sigma;
    let ln_u_front = u.alpha * u.lambda.ln() - ln_gamma(u.alpha);
    let outer = |yu: f64| {
        let uu = yu.exp();
        if uu == 0.0 || !uu.is_finite() {
            return 0.0;
        }
        let z = x - p.mu - p.gamma * uu;
        let at = t.alpha * uu;
        let ln_t_front = at * t.lambda.ln() - ln_gamma(at);
        let inner = |yy: f64| {
            let y = yy.exp();
            if y == 0.0 || !y.is_finite() {
                return 0.0;
            }
            let d = z - p.rho * y;
            let ln_val = -d * d / (2.0 * s2 * y)
                - 0.5 * (2.0 * std::f64::consts::PI * s2 * y).ln()
                + (at - 1.0) * yy
                - t.lambda * y
                + yy;
            (ln_t_front + ln_val).exp()
        };
        let iv = adaptive_quad(inner, f64::NEG_INFINITY, f64::INFINITY, 1e-11, 1e-6)
            .map(|r| r.value)
            .unwrap_or(0.0);
        let ln_w = (u.alpha - 1.0) * yu - u.lambda * uu + yu;
        iv * (ln_u_front + ln_w).exp()
    };
    let r = adaptive_quad(outer, f64::NEG_INFINITY, f64::INFINITY, 1e-10, 1e-5)?;
    Ok(r.value.max(0.0))
}

/// Literal normal-compound-inverse-Gaussian chf (nested square roots).
pub fn ncig_chf(p: &LogPriceParams, t: &IGParams, u: &IGParams, v: f64) -> Complex64 {
    let iv = Complex64::new(0.0, v);
    let w = iv * p.rho - 0.5 * v * v * p.sigma * p.sigma;
    let inner = (Complex64::new(1.0, 0.0) - 2.0 * t.mu * t.mu / t.lambda * w).sqrt();
    let mid = t.lambda / t.mu * (1.0 - inner) + iv * p.gamma;
    let outer = (Complex64::new(1.0, 0.0) - 2.0 * u.mu * u.mu / u.lambda * mid).sqrt();
    (iv * p.mu + u.lambda / u.mu * (1.0 - outer)).exp()
}

/// n-fold IG log-price chf; `levels` in generation order, n >= 2.
pub fn multi_ncig_chf(
    mu: f64,
    sigma: f64,
    levels: &[(IGParams, f64)],
    v: f64,
) -> Result<Complex64> {
    Ok(ReturnLaw::ncig_multi(mu, sigma, levels)?.chf(v))
}

/// Closed-form mean, variance and skewness of the
/// normal-compound-inverse-Gaussian law (no closed fourth moment).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcigMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

pub fn ncig_moments(p: &LogPriceParams, t: &IGParams, u: &IGParams) -> NcigMoments {
    let law = ReturnLaw::ncig(p, t, u).expect("validated");
    let c = law.cumulants().expect("IG cumulants exist");
    NcigMoments {
        mean: c.mean(),
        variance: c.variance(),
        skewness: c.skewness(),
    }
}

/// Direct double-integral density of the normal-compound-inverse-Gaussian
/// law (normal mixture over the IG clock of an IG clock). A slow oracle.
pub fn ncig_pdf_direct(
    p: &LogPriceParams,
    t: &IGParams,
    u: &IGParams,
    x: f64,
) -> Result<f64> {
    let s2 = p.sigma * p.sigma;
    let two_pi = 2.0 * std::f64::consts::PI;
    let outer = |yu: f64| {
        let uu = yu.exp();
        if uu == 0.0 || !uu.is_finite() {
            return 0.0;
        }
        let z = x - p.mu - p.gamma * uu;
        // T(u) ~ IG(mu_T u, lambda_T u^2)
        let (m, l) = (t.mu * uu, t.lambda * uu * uu);
        let inner = |yy: f64| {
            let y = yy.exp();
            if y == 0.0 || !y.is_finite() {
                return 0.0;
            }
            let d = z - p.rho * y;
            let dig = y - m;
            let ln_val = -d * d / (2.0 * s2 * y) - 0.5 * (two_pi * s2 * y).ln()
                + 0.5 * (l / (two_pi * y.powi(3))).ln()
                - l * dig * dig / (2.0 * m * m * y)
                + yy;
            ln_val.exp()
        };
        let iv = adaptive_quad(inner, f64::NEG_INFINITY, f64::INFINITY, 1e-11, 1e-6)
            .map(|r| r.value)
            .unwrap_or(0.0);
        let dig = uu - u.mu;
        let ln_w = 0.5 * (u.lambda / (two_pi * uu.powi(3))).ln()
            - u.lambda * dig * dig / (2.0 * u.mu * u.mu * uu)
            + yu;
        iv * ln_w.exp()
    };
    let r = adaptive_quad(outer, f64::NEG_INFINITY, f64::INFINITY, 1e-10, 1e-5)?;
    Ok(r.value.max(0.0))
}

/// Draws of the unit-increment return of `law`.
pub fn sample_return(law: &ReturnLaw, n: usize, seed: u64) -> Vec<f64> {
    law.sample(n, seed)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::numerics::fft::SpanRule;
    use crate::testutil::{mean_and_se, moments_with_se};

    fn lp(mu: f64, gamma: f64, rho: f64, sigma: f64) -> LogPriceParams {
        LogPriceParams::new(mu, gamma, rho, sigma).unwrap()
    }
    fn ls(b: f64) -> LevyStableParams {
        LevyStableParams::new(b).unwrap()
    }
    fn gam(a: f64, l: f64) -> GammaParams {
        GammaParams::new(a, l).unwrap()
    }
    fn ig(m: f64, l: f64) -> IGParams {
        IGParams::new(m, l).unwrap()
    }

    /// Estimated parameters of the two-level IG return law fitted to a
    /// broad equity index in the source study; used as the
    /// paper-anchored reference point throughout the tests.
    pub(crate) fn reference_ncig() -> (LogPriceParams, IGParams, IGParams) {
        (
            lp(0.0, 0.0, -0.281, 0.252),
            ig(0.122, 12.54),
            ig(0.0035, 17.66),
        )
    }

    #[test]
    fn ncls_chf_basics() {
        let p = lp(0.3, 0.1, -0.2, 1.0);
        let (t, u) = (ls(0.5), ls(0.5));
        assert!((ncls_chf(&p, &t, &u, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for i in 1..=100 {
            let v = i as f64 * 0.2;
            let a = ncls_chf(&p, &t, &u, v);
            let b = ncls_chf(&p, &t, &u, -v);
            assert!((a - b.conj()).norm() < 1e-13);
            assert!(a.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn ncls_chf_matches_simulation() {
        let p = lp(0.0, 0.0, 0.0, 1.0);
        let (t, u) = (ls(0.5), ls(0.5));
        let law = ReturnLaw::ncls(&p, &t, &u).unwrap();
        let draws = law.sample(200_000, 42);
        for &v in &[0.5, 1.0] {
            let re: Vec<f64> = draws.iter().map(|&x| (v * x).cos()).collect();
            let im: Vec<f64> = draws.iter().map(|&x| (v * x).sin()).collect();
            let (rm, rs) = mean_and_se(&re);
            let (im_m, is) = mean_and_se(&im);
            let want = ncls_chf(&p, &t, &u, v);
            assert!((rm - want.re).abs() < 3.0 * rs, "re at v={v}");
            assert!((im_m - want.im).abs() < 3.0 * is, "im at v={v}");
        }
    }

    #[test]
    fn ncn_stable_reduces_to_ncls() {
        let p = lp(0.4, 0.3, -0.6, 0.9);
        let (t, u) = (ls(0.7), ls(1.2));
        let levels = [(u, p.gamma), (t, p.rho)];
        for i in -100..=100 {
            let v = i as f64 * 0.11;
            let a = ncn_stable_chf(p.mu, p.sigma, &levels, v).unwrap();
            let b = ncls_chf(&p, &t, &u, v);
            assert!((a - b).norm() < 1e-12, "v={v}: {a} vs {b}");
        }
        let three = [(u, 0.1), (ls(0.4), 0.2), (t, -0.3)];
        assert!(
            (ncn_stable_chf(0.0, 1.0, &three, 0.0).unwrap() - Complex64::new(1.0, 0.0)).norm()
                < 1e-15
        );
        for i in 1..=60 {
            let v = i as f64 * 0.3;
            assert!(ncn_stable_chf(0.0, 1.0, &three, v).unwrap().norm() <= 1.0 + 1e-12);
        }
        assert!(ncn_stable_chf(0.0, 1.0, &[(u, 0.1)], 1.0).is_err());
    }

    #[test]
    fn ncls_moments_are_undefined() {
        let p = lp(0.0, 0.0, 1.0, 1.0);
        let law = ReturnLaw::ncls(&p, &ls(0.5), &ls(0.5)).unwrap();
        let m = law.moments();
        assert_eq!(m.mean, TaggedValue::Undefined);
        assert_eq!(m.variance, TaggedValue::Undefined);
        assert_eq!(m.skewness, TaggedValue::Undefined);
        assert_eq!(m.excess_kurtosis, TaggedValue::Undefined);
        assert_eq!(m.mean.value(), None);
    }

    #[test]
    fn ncls_pdf_direct_normalizes_and_translates() {
        let p = lp(0.0, 0.0, 1.0, 1.0);
        let (t, u) = (ls(0.5), ls(0.5));
        // normalization: the right tail decays like x^{-5/4} (the clock is a
        // quarter-stable subordinator), so integrate the body directly and
        // flatten the tail with x = X (1-t)^{-4}
        let body = adaptive_quad(
            |x| ncls_pdf_direct(&p, &t, &u, x).unwrap(),
            f64::NEG_INFINITY,
            100.0,
            1e-7,
            1e-6,
        )
        .unwrap()
        .value;
        let x_split = 100.0;
        let tail = adaptive_quad(
            |tt: f64| {
                let om: f64 = 1.0 - tt;
                let x = x_split * om.powi(-4);
                ncls_pdf_direct(&p, &t, &u, x).unwrap() * 4.0 * x_split * om.powi(-5)
            },
            0.0,
            1.0,
            1e-7,
            1e-6,
        )
        .unwrap()
        .value;
        let total = body + tail;
        assert!((total - 1.0).abs() < 1e-4, "norm {total}");
        // translation by mu moves the density
        let shifted = lp(0.7, 0.0, 1.0, 1.0);
        let a = ncls_pdf_direct(&p, &t, &u, 0.25).unwrap();
        let b = ncls_pdf_direct(&shifted, &t, &u, 0.95).unwrap();
        assert!((a - b).abs() < 1e-8);
        // rho = 0 falls back to the FFT route
        assert!(ncls_pdf_direct(&lp(0.0, 0.0, 0.0, 1.0), &t, &u, 0.0).is_err());
    }

    #[test]
    fn ncls_dual_route_agreement() {
        let p = lp(0.0, 0.0, 1.0, 1.0);
        let (t, u) = (ls(0.5), ls(0.5));
        let law = ReturnLaw::ncls(&p, &t, &u).unwrap();
        let cfg = FftConfig {
            grid_size: 1 << 18,
            span: SpanRule::Manual {
                center: 0.0,
                half_width: 2000.0,
            },
            mass_tolerance: 0.2, // quarter-stable tail: most mass is in-grid but not all
            ..Default::default()
        };
        let grid = law.pdf_grid(&cfg).unwrap();
        for i in -5..=5 {
            let x = grid.x_at(grid.len() / 2) + i as f64 * 655.0 * grid.dx();
            let direct = ncls_pdf_direct(&p, &t, &u, x).unwrap();
            let fft = grid.pdf_raw_at(x);
            assert!(
                (direct - fft).abs() < 1e-4,
                "x={x}: direct {direct} vs fft {fft}"
            );
        }
    }

    #[test]
    fn vgg_chf_and_mgf_basics() {
        let p = lp(0.3, 0.7, -0.4, 1.2);
        let (t, u) = (gam(1.5, 2.2), gam(0.8, 1.1));
        assert!((vgg_chf(&p, &t, &u, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((vgg_mgf(&p, &t, &u, 0.0).unwrap() - 1.0).abs() < 1e-15);
        // finite-difference mean from the MGF matches the closed form
        let h = 1e-6;
        let d = (vgg_mgf(&p, &t, &u, h).unwrap() - vgg_mgf(&p, &t, &u, -h).unwrap()) / (2.0 * h);
        let m = vgg_moments(&p, &t, &u);
        assert!(((d - m.mean) / m.mean).abs() < 1e-6, "{d} vs {}", m.mean);
        // conjugate symmetry
        for i in 1..=80 {
            let v = i as f64 * 0.15;
            let a = vgg_chf(&p, &t, &u, v);
            assert!((a - vgg_chf(&p, &t, &u, -v).conj()).norm() < 1e-13);
            assert!(a.norm() <= 1.0 + 1e-12);
        }
        // MGF domain error far out
        assert!(vgg_mgf(&p, &t, &u, 1e6).is_err());
    }

    #[test]
    fn vgg_chf_matches_simulation() {
        let p = lp(0.0, 1.0, 1.0, 1.0);
        let (t, u) = (gam(1.0, 1.0), gam(1.0, 1.0));
        let law = ReturnLaw::vgg(&p, &t, &u).unwrap();
        let draws = law.sample(200_000, 7);
        for &v in &[1.0, 2.0] {
            let re: Vec<f64> = draws.iter().map(|&x| (v * x).cos()).collect();
            let im: Vec<f64> = draws.iter().map(|&x| (v * x).sin()).collect();
            let (rm, rs) = mean_and_se(&re);
            let (im_m, is) = mean_and_se(&im);
            let want = vgg_chf(&p, &t, &u, v);
            assert!((rm - want.re).abs() < 3.0 * rs, "re v={v}");
            assert!((im_m - want.im).abs() < 3.0 * is, "im v={v}");
        }
    }

    #[test]
    fn multi_vgg_reduces_to_vgg() {
        let p = lp(0.25, 0.6, -0.7, 1.1);
        let (t, u) = (gam(2.0, 1.4), gam(0.9, 2.5));
        let levels = [(u, p.gamma), (t, p.rho)];
        for i in -100..=100 {
            let v = i as f64 * 0.12;
            let a = multi_vgg_chf(p.mu, p.sigma, &levels, v).unwrap();
            let b = vgg_chf(&p, &t, &u, v);
            assert!((a - b).norm() < 1e-12, "v={v}");
        }
        let three = [(u, 0.2), (gam(1.0, 1.0), -0.1), (t, 0.4)];
        assert!(
            (multi_vgg_chf(0.0, 1.0, &three, 0.0).unwrap() - Complex64::new(1.0, 0.0)).norm()
                < 1e-15
        );
        for i in 1..=60 {
            let v = i as f64 * 0.25;
            let a = multi_vgg_chf(0.0, 1.0, &three, v).unwrap();
            assert!((a - multi_vgg_chf(0.0, 1.0, &three, -v).unwrap().conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn vgg_moments_collapse_and_monte_carlo() {
        // gamma = rho = 0 collapses the mean to mu
        let m = vgg_moments(&lp(1.0, 0.0, 0.0, 1.0), &gam(1.0, 1.0), &gam(1.0, 1.0));
        assert!((m.mean - 1.0).abs() < 1e-14);
        // Monte Carlo agreement at a couple of random-ish parameter points
        for (seed, p, t, u) in [
            (1u64, lp(0.3, 0.7, -0.4, 1.2), gam(1.5, 2.2), gam(0.8, 1.1)),
            (2, lp(-0.2, 0.2, 0.5, 0.8), gam(2.4, 1.2), gam(1.6, 2.0)),
            (3, lp(0.0, -0.5, 0.3, 1.5), gam(0.9, 0.7), gam(2.2, 1.3)),
        ] {
            let want = vgg_moments(&p, &t, &u);
            let law = ReturnLaw::vgg(&p, &t, &u).unwrap();
            let got = moments_with_se(&law.sample(400_000, seed), 50);
            assert!((got.mean - want.mean).abs() < 3.0 * got.mean_se, "seed {seed}");
            assert!(
                (got.variance - want.variance).abs() < 3.0 * got.variance_se,
                "seed {seed}"
            );
            assert!(
                (got.skewness - want.skewness).abs() < 3.0 * got.skewness_se,
                "seed {seed}: {} vs {}",
                got.skewness,
                want.skewness
            );
            assert!(
                (got.excess_kurtosis - want.excess_kurtosis).abs()
                    < 3.0 * got.excess_kurtosis_se,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn vgg_excess_kurtosis_is_nonnegative() {
        // The unit increment of a Levy process with finite fourth moment has
        // kappa_4 equal to the fourth moment of its Levy measure, which is
        // nonnegative; opposite-sign loadings can shrink the excess kurtosis
        // toward zero but can never make the law platykurtic. A wide search
        // confirms the bound (and that opposite signs do push it down).
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut min_same: f64 = f64::INFINITY;
        let mut min_opposite: f64 = f64::INFINITY;
        for _ in 0..20_000 {
            let g = (rng.random::<f64>() * 10.0 + 0.1) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let r = (rng.random::<f64>() * 10.0 + 0.1) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let s = rng.random::<f64>() * 2.0 + 0.01;
            let scale = |x: f64| (x * 7.0 - 3.0f64).exp();
            let t = gam(scale(rng.random()), scale(rng.random()));
            let u = gam(scale(rng.random()), scale(rng.random()));
            let p = lp(0.0, g, r, s);
            let ek = vgg_moments(&p, &t, &u).excess_kurtosis;
            assert!(ek >= -1e-10, "platykurtic point found: {ek}");
            if g * r < 0.0 {
                min_opposite = min_opposite.min(ek);
            } else {
                min_same = min_same.min(ek);
            }
        }
        assert!(
            min_opposite < min_same,
            "opposite-sign loadings should reach lower kurtosis ({min_opposite} vs {min_same})"
        );
    }

    #[test]
    fn vgg_dual_route_agreement() {
        let p = lp(0.0, 0.5, -0.5, 1.0);
        let (t, u) = (gam(1.0, 1.0), gam(1.0, 1.0));
        let law = ReturnLaw::vgg(&p, &t, &u).unwrap();
        let grid = law.pdf_grid(&FftConfig::default()).unwrap();
        // normalization of the direct double integral
        let total = adaptive_quad(
            |x| vgg_pdf_direct(&p, &t, &u, x).unwrap(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            1e-4,
            1e-3,
        )
        .unwrap();
        assert!((total.value - 1.0).abs() < 1e-3, "norm {}", total.value);
        for i in -3..=3 {
            let x = 0.4 * i as f64 - 0.1;
            let direct = vgg_pdf_direct(&p, &t, &u, x).unwrap();
            let fft = grid.pdf_at(x);
            assert!(
                (direct - fft).abs() < 1e-3,
                "x={x}: direct {direct} vs fft {fft}"
            );
        }
    }

    #[test]
    fn ncig_chf_basics_and_reference_point() {
        let (p, t, u) = reference_ncig();
        assert!((ncig_chf(&p, &t, &u, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let law = ReturnLaw::ncig(&p, &t, &u).unwrap();
        let grid = law.pdf_grid(&FftConfig::default()).unwrap();
        // renormalized density integrates to 1 and the raw mass is close
        assert!((grid.raw_mass - 1.0).abs() < 1e-4);
        let mass: f64 = {
            let vals = grid.values();
            (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[vals.len() - 1])) * grid.dx()
        };
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ncig_chf_matches_simulation() {
        let (p, t, u) = reference_ncig();
        let law = ReturnLaw::ncig(&p, &t, &u).unwrap();
        let draws = law.sample(200_000, 17);
        for &v in &[5.0, 10.0] {
            let re: Vec<f64> = draws.iter().map(|&x| (v * x).cos()).collect();
            let im: Vec<f64> = draws.iter().map(|&x| (v * x).sin()).collect();
            let (rm, rs) = mean_and_se(&re);
            let (im_m, is) = mean_and_se(&im);
            let want = ncig_chf(&p, &t, &u, v);
            assert!((rm - want.re).abs() < 3.0 * rs, "re v={v}");
            assert!((im_m - want.im).abs() < 3.0 * is, "im v={v}");
        }
    }

    #[test]
    fn multi_ncig_reduces_to_ncig() {
        let p = lp(0.1, -0.3, 0.8, 0.7);
        let (t, u) = (ig(1.4, 0.9), ig(0.8, 2.1));
        let levels = [(u, p.gamma), (t, p.rho)];
        for i in -100..=100 {
            let v = i as f64 * 0.13;
            let a = multi_ncig_chf(p.mu, p.sigma, &levels, v).unwrap();
            let b = ncig_chf(&p, &t, &u, v);
            assert!((a - b).norm() < 1e-12, "v={v}");
        }
        let three = [(u, 0.1), (ig(1.0, 1.0), 0.3), (t, -0.2)];
        assert!(
            (multi_ncig_chf(0.0, 1.0, &three, 0.0).unwrap() - Complex64::new(1.0, 0.0)).norm()
                < 1e-15
        );
        for i in 1..=60 {
            let v = i as f64 * 0.4;
            assert!(multi_ncig_chf(0.0, 1.0, &three, v).unwrap().norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn ncig_moment_values() {
        let (p, t, u) = reference_ncig();
        let m = ncig_moments(&p, &t, &u);
        // mean = mu + mu_U gamma + mu_U mu_T rho
        assert!((m.mean - (-1.199_87e-4)).abs() < 1e-9, "mean {}", m.mean);
        let m0 = ncig_moments(&lp(0.0, 0.0, 0.0, 1.0), &t, &u);
        assert!(m0.mean.abs() < 1e-15);
        // Monte Carlo agreement over random-ish draws
        for (seed, p, t, u) in [
            (11u64, lp(0.2, 0.4, -0.5, 0.9), ig(1.2, 1.7), ig(0.7, 1.1)),
            (12, lp(-0.1, -0.2, 0.6, 1.3), ig(0.5, 2.0), ig(1.5, 0.8)),
            (13, lp(0.0, 0.1, 0.2, 0.6), ig(2.0, 1.0), ig(1.0, 3.0)),
        ] {
            let want = ncig_moments(&p, &t, &u);
            let law = ReturnLaw::ncig(&p, &t, &u).unwrap();
            let got = moments_with_se(&law.sample(400_000, seed), 50);
            assert!((got.mean - want.mean).abs() < 3.0 * got.mean_se, "seed {seed}");
            assert!(
                (got.variance - want.variance).abs() < 3.0 * got.variance_se,
                "seed {seed}"
            );
            assert!(
                (got.skewness - want.skewness).abs() < 3.0 * got.skewness_se,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn ncig_closed_moments_match_chf_derivatives() {
        // three-way agreement leg: chf finite differences (with one
        // Richardson refinement) against the composed cumulants
        let check = |p: LogPriceParams, t: IGParams, u: IGParams, tol: f64| {
            let law = ReturnLaw::ncig(&p, &t, &u).unwrap();
            let c = law.cumulants().unwrap();
            let scale = c.variance().sqrt();
            let k = |v: f64| law.chf(v).ln();
            let fd = |h: f64| {
                let k1 = (8.0 * k(h).im - k(2.0 * h).im) / (6.0 * h);
                let k2 = -(16.0 * k(h).re - k(2.0 * h).re) / (6.0 * h * h);
                let k3 = (2.0 * k(h).im - k(2.0 * h).im) / h.powi(3);
                (k1, k2, k3)
            };
            let h = 0.05 / scale;
            let (a1, a2, a3) = fd(h);
            let (b1, b2, b3) = fd(0.5 * h);
            // Richardson: the k3 formula has O(h^2) error
            let k3 = (4.0 * b3 - a3) / 3.0;
            let _ = (a1, a2);
            assert!(((b1 - c.kappa1) / c.kappa1).abs() < tol, "k1 {b1} vs {}", c.kappa1);
            assert!(((b2 - c.kappa2) / c.kappa2).abs() < tol, "k2 {b2} vs {}", c.kappa2);
            assert!(((k3 - c.kappa3) / c.kappa3).abs() < tol, "k3 {k3} vs {}", c.kappa3);
        };
        check(lp(0.2, 0.4, -0.5, 0.9), ig(1.2, 1.7), ig(0.7, 1.1), 1e-4);
        check(lp(-0.1, 0.3, 0.7, 1.1), ig(0.8, 2.0), ig(1.4, 0.9), 1e-4);
        let (p, t, u) = reference_ncig();
        check(p, t, u, 1e-3);
    }

    #[test]
    fn vgg_closed_moments_match_chf_derivatives() {
        let p = lp(0.3, 0.7, -0.4, 1.2);
        let (t, u) = (gam(1.5, 2.2), gam(0.8, 1.1));
        let law = ReturnLaw::vgg(&p, &t, &u).unwrap();
        let m = vgg_moments(&p, &t, &u);
        let k = |v: f64| law.chf(v).ln();
        let h = 0.025 / m.variance.sqrt();
        let k1 = (8.0 * k(h).im - k(2.0 * h).im) / (6.0 * h);
        let k2 = -(16.0 * k(h).re - k(2.0 * h).re) / (6.0 * h * h);
        let k3a = (2.0 * k(h).im - k(2.0 * h).im) / h.powi(3);
        let k3b = (2.0 * k(0.5 * h).im - k(h).im) / (0.5 * h).powi(3);
        let k3 = (4.0 * k3b - k3a) / 3.0;
        assert!(((k1 - m.mean) / m.mean).abs() < 1e-4);
        assert!(((k2 - m.variance) / m.variance).abs() < 1e-4);
        let kappa3 = m.skewness * m.variance.powf(1.5);
        assert!(((k3 - kappa3) / kappa3).abs() < 1e-4, "{k3} vs {kappa3}");
    }

    #[test]
    fn ncig_pdf_direct_dual_route_and_symmetry() {
        let p = lp(0.0, 0.0, 0.0, 1.0);
        let (t, u) = (ig(1.0, 1.0), ig(1.0, 1.0));
        // symmetric when all loadings vanish
        for &x in &[0.3, 0.8, 1.7] {
            let a = ncig_pdf_direct(&p, &t, &u, x).unwrap();
            let b = ncig_pdf_direct(&p, &t, &u, -x).unwrap();
            assert!(((a - b) / a).abs() < 1e-6, "x={x}");
        }
        let total = adaptive_quad(
            |x| ncig_pdf_direct(&p, &t, &u, x).unwrap(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            1e-4,
            1e-3,
        )
        .unwrap();
        assert!((total.value - 1.0).abs() < 1e-3, "norm {}", total.value);
        let law = ReturnLaw::ncig(&p, &t, &u).unwrap();
        let grid = law.pdf_grid(&FftConfig::default()).unwrap();
        for i in -3..=3 {
            let x = 0.5 * i as f64 + 0.05;
            let direct = ncig_pdf_direct(&p, &t, &u, x).unwrap();
            let fft = grid.pdf_at(x);
            assert!(
                (direct - fft).abs() < 1e-3,
                "x={x}: direct {direct} vs fft {fft}"
            );
        }
    }

    #[test]
    fn sample_return_degenerate_and_moments() {
        let p = lp(2.5, 0.0, 0.0, 1e-9);
        let law = ReturnLaw::ncig(&p, &ig(1.0, 1.0), &ig(1.0, 1.0)).unwrap();
        for x in law.sample(100, 1) {
            assert!((x - 2.5).abs() < 1e-6);
        }
        // unit-parameter NCIG mean and variance against closed forms
        let p = lp(0.1, 0.3, -0.4, 1.0);
        let (t, u) = (ig(1.0, 1.0), ig(1.0, 1.0));
        let law = ReturnLaw::ncig(&p, &t, &u).unwrap();
        let want = ncig_moments(&p, &t, &u);
        let got = moments_with_se(&law.sample(400_000, 2), 50);
        assert!((got.mean - want.mean).abs() < 3.0 * got.mean_se);
        assert!((got.variance - want.variance).abs() < 3.0 * got.variance_se);
        // determinism
        assert_eq!(law.sample(16, 3), law.sample(16, 3));
    }

    #[test]
    fn single_level_law_supported() {
        let u = ig(1.0, 2.0);
        let law = ReturnLaw::single_ig(0.0, 0.5, 1.0, &u).unwrap();
        assert!((law.chf(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let m = law.moments();
        // mean = gamma mu_U
        assert!((m.mean.value().unwrap() - 0.5).abs() < 1e-12);
    }
}
