//! Composition algebra for subordinators: a compound clock `V(t) = T(U(t))`
//! (and deeper nestings) described through Laplace exponents, transforms,
//! densities where a single-integral form exists, cumulants, and samplers.
//!
//! Transform composition rule: if `V(t) = A(B(t))` with `A` applied to the
//! running value of `B`, then the cumulant transforms chain as
//! `K_V = K_B (K_A (.))`, and Laplace exponents as `Phi_V = Phi_B (Phi_A (.))`.

use crate::error::{Error, Result};
use crate::numerics::quad::adaptive_quad;
use crate::numerics::special::ln_gamma;
use crate::subordinators::{
    draw_gamma, draw_ig, draw_levy_stable, draw_positive_stable, GammaParams, IGParams,
    LevyStableParams, StableSubParams,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A base subordinator law usable inside a [`CompoundChain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseLaw {
    StableSub(StableSubParams),
    LevyStable(LevyStableParams),
    Gamma(GammaParams),
    Ig(IGParams),
}

impl BaseLaw {
    /// Laplace exponent `Phi(s) = -ln E exp(-s X(1))`, s > 0.
    pub fn laplace_exponent(&self, s: f64) -> f64 {
        match self {
            BaseLaw::StableSub(p) => (p.delta * s).powf(p.alpha_half),
            BaseLaw::LevyStable(p) => (2.0 * p.b * s).sqrt(),
            BaseLaw::Gamma(p) => p.alpha * (1.0 + s / p.lambda).ln(),
            BaseLaw::Ig(p) => {
                p.lambda / p.mu * ((1.0 + 2.0 * p.mu * p.mu * s / p.lambda).sqrt() - 1.0)
            }
        }
    }

    /// Cumulant transform `K(w) = ln E exp(w X(1))` for complex `w` with
    /// `Re w <= 0`. All intermediate radicands and logarithm arguments stay
    /// in the right half plane there, so the principal branch is the
    /// analytic continuation from w = 0.
    pub fn cumulant_transform(&self, w: Complex64) -> Complex64 {
        match self {
            BaseLaw::StableSub(p) => -(-p.delta * w).powf(p.alpha_half),
            BaseLaw::LevyStable(p) => -(-2.0 * p.b * w).sqrt(),
            BaseLaw::Gamma(p) => -p.alpha * (1.0 - w / p.lambda).ln(),
            BaseLaw::Ig(p) => {
                let r = (Complex64::new(1.0, 0.0) - 2.0 * p.mu * p.mu / p.lambda * w).sqrt();
                p.lambda / p.mu * (1.0 - r)
            }
        }
    }

    /// Real cumulant transform `ln E exp(v X(1))` with its domain check.
    pub fn cumulant_transform_real(&self, v: f64) -> Result<f64> {
        match self {
            BaseLaw::StableSub(p) => {
                if v > 0.0 {
                    Err(Error::domain(
                        "stable subordinators have no finite exponential moments",
                    ))
                } else {
                    Ok(-(-p.delta * v).powf(p.alpha_half))
                }
            }
            BaseLaw::LevyStable(p) => {
                if v > 0.0 {
                    Err(Error::domain(
                        "the one-sided 1/2-stable law has no finite exponential moments",
                    ))
                } else {
                    Ok(-(-2.0 * p.b * v).sqrt())
                }
            }
            BaseLaw::Gamma(p) => {
                if v >= p.lambda {
                    Err(Error::domain(format!(
                        "gamma cumulant transform needs v < lambda = {}, got {v}",
                        p.lambda
                    )))
                } else {
                    Ok(-p.alpha * (1.0 - v / p.lambda).ln())
                }
            }
            BaseLaw::Ig(p) => {
                let bound = p.lambda / (2.0 * p.mu * p.mu);
                if v > bound {
                    Err(Error::domain(format!(
                        "IG cumulant transform needs v <= lambda/(2 mu^2) = {bound}, got {v}"
                    )))
                } else {
                    Ok(p.lambda / p.mu * (1.0 - (1.0 - v / bound).sqrt()))
                }
            }
        }
    }

    /// First four cumulants of the unit increment, when they exist.
    pub fn unit_cumulants(&self) -> Result<CumulantSet> {
        match self {
            BaseLaw::Gamma(p) => Ok(CumulantSet::new(
                p.alpha / p.lambda,
                p.alpha / p.lambda.powi(2),
                2.0 * p.alpha / p.lambda.powi(3),
                6.0 * p.alpha / p.lambda.powi(4),
            )),
            BaseLaw::Ig(p) => Ok(CumulantSet::new(
                p.mu,
                p.mu.powi(3) / p.lambda,
                3.0 * p.mu.powi(5) / p.lambda.powi(2),
                15.0 * p.mu.powi(7) / p.lambda.powi(3),
            )),
            BaseLaw::StableSub(p) if p.alpha_half == 1.0 => {
                Ok(CumulantSet::new(p.delta, 0.0, 0.0, 0.0))
            }
            _ => Err(Error::MomentsUndefined),
        }
    }

    /// One draw of `X(t)` for elapsed time `t > 0`, using the law's exact
    /// time scaling: gamma shape scales linearly, `IG(mu t, lambda t^2)`,
    /// stable laws by strict self-similarity.
    pub fn draw_at<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        match self {
            BaseLaw::StableSub(p) => {
                if p.alpha_half == 1.0 {
                    p.delta * t
                } else if p.alpha_half == 0.5 {
                    draw_levy_stable(t * t * p.delta / 2.0, rng)
                } else {
                    t.powf(1.0 / p.alpha_half) * p.delta * draw_positive_stable(p.alpha_half, rng)
                }
            }
            BaseLaw::LevyStable(p) => draw_levy_stable(p.b * t * t, rng),
            BaseLaw::Gamma(p) => draw_gamma(p.alpha * t, p.lambda, rng),
            BaseLaw::Ig(p) => draw_ig(p.mu * t, p.lambda * t * t, rng),
        }
    }
}

/// Ordered composition of base laws, outermost first: `laws[0]` is applied to
/// the value produced by `laws[1]`, and so on; the last law runs on calendar
/// time. For the two-level clock `V(t) = T(U(t))` the chain is `[T, U]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundChain {
    laws: Vec<BaseLaw>,
}

impl CompoundChain {
    pub fn new(laws: Vec<BaseLaw>) -> Result<Self> {
        if laws.is_empty() {
            return Err(Error::domain("compound chain must have at least one law"));
        }
        Ok(Self { laws })
    }

    pub fn laws(&self) -> &[BaseLaw] {
        &self.laws
    }

    pub fn depth(&self) -> usize {
        self.laws.len()
    }

    /// Laplace exponent of the composed unit increment `V(1)`.
    pub fn laplace_exponent(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain(format!("laplace exponent needs s > 0, got {s}")));
        }
        let mut w = s;
        for law in &self.laws {
            w = law.laplace_exponent(w);
        }
        Ok(w)
    }

    /// Characteristic function of `V(1)`.
    pub fn chf(&self, v: f64) -> Complex64 {
        let mut w = Complex64::new(0.0, v);
        for law in &self.laws {
            w = law.cumulant_transform(w);
        }
        w.exp()
    }

    /// First four cumulants of `V(1)` by transform composition.
    pub fn cumulants(&self) -> Result<CumulantSet> {
        let mut acc = self.laws[0].unit_cumulants()?;
        for law in &self.laws[1..] {
            acc = acc.subordinate_by(&law.unit_cumulants()?);
        }
        Ok(acc)
    }

    /// Draws of `V(1)`, innermost law first, each level clocked by the last.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut t = 1.0;
        for law in self.laws.iter().rev() {
            t = law.draw_at(t, rng);
        }
        t
    }
}

/// First four cumulants of a compound subordinator unit increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
}

impl CumulantSet {
    pub fn new(kappa1: f64, kappa2: f64, kappa3: f64, kappa4: f64) -> Self {
        Self {
            kappa1,
            kappa2,
            kappa3,
            kappa4,
        }
    }

    /// Cumulants of `X(Y(1))` where `self` describes `X(1)` and `clock`
    /// describes `Y(1)` (fourth-order chain rule for cumulant transforms).
    pub fn subordinate_by(&self, clock: &CumulantSet) -> CumulantSet {
        let (f1, f2, f3, f4) = (self.kappa1, self.kappa2, self.kappa3, self.kappa4);
        let (g1, g2, g3, g4) = (clock.kappa1, clock.kappa2, clock.kappa3, clock.kappa4);
        CumulantSet::new(
            g1 * f1,
            g2 * f1 * f1 + g1 * f2,
            g3 * f1.powi(3) + 3.0 * g2 * f1 * f2 + g1 * f3,
            g4 * f1.powi(4) + 6.0 * g3 * f1 * f1 * f2 + g2 * (3.0 * f2 * f2 + 4.0 * f1 * f3)
                + g1 * f4,
        )
    }

    pub fn mean(&self) -> f64 {
        self.kappa1
    }
    pub fn variance(&self) -> f64 {
        self.kappa2
    }
    pub fn skewness(&self) -> f64 {
        self.kappa3 / self.kappa2.powf(1.5)
    }
    pub fn excess_kurtosis(&self) -> f64 {
        self.kappa4 / (self.kappa2 * self.kappa2)
    }

    pub fn moments(&self) -> Moments {
        Moments {
            mean: self.mean(),
            variance: self.variance(),
            skewness: self.skewness(),
            excess_kurtosis: self.excess_kurtosis(),
        }
    }
}

/// Mean, variance, skewness and excess kurtosis of a law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// tau-compounded stable subordinator parameters: Laplace exponent
/// `s^{2^-tau} (2B)^{1 - 2^-tau}`, the continuous-index interpolation of the
/// n-fold 1/2-stable composition with constant scale `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauStableParams {
    pub tau: f64,
    pub b: f64,
}

impl TauStableParams {
    pub fn new(tau: f64, b: f64) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(Error::domain(format!("tau must be >= 0, got {tau}")));
        }
        if !(b > 0.0) {
            return Err(Error::domain(format!("scale-intensity must be > 0, got {b}")));
        }
        Ok(Self { tau, b })
    }
}

/// Laplace exponent of the double-stable clock `V(t) = T(U(t))` with a
/// stable-subordinator outer law and a one-sided 1/2-stable inner law:
/// `sqrt(2 b_U) (delta_T s)^{alpha_half/2}`.
pub fn double_stable_laplace_exponent(
    outer: &StableSubParams,
    inner: &LevyStableParams,
    s: f64,
) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("need s > 0, got {s}")));
    }
    Ok((2.0 * inner.b).sqrt() * (outer.delta * s).powf(outer.alpha_half / 2.0))
}

/// Laplace exponent of the n-fold 1/2-stable composition
/// `V(n) = U_n(U_{n-1}(... U_1(t)))`:
/// `s^{2^-n} prod_k (2 b_k)^{2^-k}` with `b_1` the deepest law.
pub fn n_stable_laplace_exponent(chain: &[LevyStableParams], s: f64) -> Result<f64> {
    if chain.is_empty() {
        return Err(Error::domain("n-fold stable chain must be nonempty"));
    }
    if !(s > 0.0) {
        return Err(Error::domain(format!("need s > 0, got {s}")));
    }
    let n = chain.len() as i32;
    let mut prod = 1.0;
    for (k, p) in chain.iter().enumerate() {
        prod *= (2.0 * p.b).powf(2.0f64.powi(-(k as i32 + 1)));
    }
    Ok(s.powf(2.0f64.powi(-n)) * prod)
}

/// Laplace exponent of the tau-compounded stable subordinator; tau = 0 is the
/// identity clock with exponent `s`.
pub fn tau_stable_laplace_exponent(p: &TauStableParams, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("need s > 0, got {s}")));
    }
    if p.tau == 0.0 {
        return Ok(s);
    }
    let a = 2.0f64.powf(-p.tau);
    Ok(s.powf(a) * (2.0 * p.b).powf(1.0 - a))
}

/// Validity bound for the double-gamma MGF: `lambda_T (1 - exp(-lambda_U/alpha_T))`.
pub fn double_gamma_mgf_bound(outer: &GammaParams, inner: &GammaParams) -> f64 {
    outer.lambda * (1.0 - (-inner.lambda / outer.alpha).exp())
}

/// MGF of the double-gamma clock `V(1) = T(U(1))`:
/// `(1 + alpha_T/lambda_U ln(1 - v/lambda_T))^{-alpha_U}` for
/// `v < lambda_T (1 - exp(-lambda_U/alpha_T))`.
pub fn double_gamma_mgf(outer: &GammaParams, inner: &GammaParams, v: f64) -> Result<f64> {
    let bound = double_gamma_mgf_bound(outer, inner);
    if !(v < bound) {
        return Err(Error::domain(format!(
            "double_gamma_mgf: v must be < {bound}, got {v}"
        )));
    }
    Ok((1.0 + outer.alpha / inner.lambda * (1.0 - v / outer.lambda).ln()).powf(-inner.alpha))
}

/// Density of the double-gamma clock by adaptive quadrature of the gamma
/// mixture in the inner time `u` (log-substituted: the integrand peaks
/// sharply for small and large `x`).
pub fn double_gamma_pdf(outer: &GammaParams, inner: &GammaParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("double_gamma_pdf: x must be > 0, got {x}")));
    }
    let (at, lt) = (outer.alpha, outer.lambda);
    let (au, lu) = (inner.alpha, inner.lambda);
    let lnx = x.ln();
    let ln_front = au * lu.ln() - ln_gamma(au) - lt * x;
    // integrand over y = ln u
    let f = |y: f64| {
        let u = y.exp();
        if u == 0.0 || !u.is_finite() {
            return 0.0;
        }
        let ln_term = at * u * lt.ln() - ln_gamma(at * u) + (at * u - 1.0) * lnx
            + (au - 1.0) * y
            - lu * u
            + y; // + y for du = u dy
        (ln_front + ln_term).exp()
    };
    let r = adaptive_quad(f, f64::NEG_INFINITY, f64::INFINITY, 1e-10, 1e-8)?;
    Ok(r.value.max(0.0))
}

/// Closed-form moments of the double-gamma clock.
pub fn double_gamma_moments(outer: &GammaParams, inner: &GammaParams) -> Moments {
    let (at, lt) = (outer.alpha, outer.lambda);
    let (au, lu) = (inner.alpha, inner.lambda);
    let r = lu / at;
    let mean = at / lt * au / lu;
    let variance = at / (lt * lt) * au / (lu * lu) * (at + lu);
    let skewness =
        2.0 / au.sqrt() * (1.0 + 1.5 * r + r * r) / (1.0 + r).powf(1.5);
    let excess_kurtosis = 6.0 / au * (1.0 + 2.0 * r + 11.0 / 6.0 * r * r + r.powi(3))
        / (1.0 + r).powi(2);
    Moments {
        mean,
        variance,
        skewness,
        excess_kurtosis,
    }
}

/// Validity bound tau_n for the n-fold gamma MGF (nested exponential bound).
/// Chain order matches [`CompoundChain`]: index 0 is the outermost law.
pub fn multi_gamma_mgf_bound(chain: &[GammaParams]) -> Result<f64> {
    if chain.is_empty() {
        return Err(Error::domain("gamma chain must be nonempty"));
    }
    let mut r = 1.0;
    for j in (1..chain.len()).rev() {
        r = 1.0 - (-chain[j].lambda * r / chain[j - 1].alpha).exp();
    }
    Ok(chain[0].lambda * r)
}

/// MGF of the n-fold gamma clock by the recursion
/// `M_n(v) = (1 - ln M_{n-1}(v) / lambda_n)^{-alpha_n}`.
pub fn multi_gamma_mgf(chain: &[GammaParams], v: f64) -> Result<f64> {
    let bound = multi_gamma_mgf_bound(chain)?;
    if !(v < bound) {
        return Err(Error::domain(format!(
            "multi_gamma_mgf: v must be < tau_n = {bound}, got {v}"
        )));
    }
    let mut w = v;
    for p in chain {
        w = BaseLaw::Gamma(*p).cumulant_transform_real(w)?;
    }
    Ok(w.exp())
}

/// First four cumulants of the n-fold gamma clock via the recursive
/// composition; the base case is the single gamma law.
pub fn multi_gamma_cumulants(chain: &[GammaParams]) -> Result<CumulantSet> {
    if chain.is_empty() {
        return Err(Error::domain("gamma chain must be nonempty"));
    }
    let laws: Vec<BaseLaw> = chain.iter().map(|p| BaseLaw::Gamma(*p)).collect();
    CompoundChain::new(laws)?.cumulants()
}

/// Density of the double-IG clock: single-integral normal-style mixture in
/// the inner time `u`, integrated adaptively on a log scale.
pub fn double_ig_pdf(outer: &IGParams, inner: &IGParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("double_ig_pdf: x must be > 0, got {x}")));
    }
    let (mt, lt) = (outer.mu, outer.lambda);
    let (mu_i, lu) = (inner.mu, inner.lambda);
    let ln_front = 0.5 * ((lt * lu).ln() - 3.0 * x.ln()) - (2.0 * std::f64::consts::PI).ln();
    let f = |y: f64| {
        let u = y.exp();
        if u == 0.0 || !u.is_finite() {
            return 0.0;
        }
        let dt = x - mt * u;
        let du = u - mu_i;
        let ln_term = -0.5 * y - lt * dt * dt / (2.0 * mt * mt * x)
            - lu * du * du / (2.0 * mu_i * mu_i * u)
            + y;
        (ln_front + ln_term).exp()
    };
    let r = adaptive_quad(f, f64::NEG_INFINITY, f64::INFINITY, 1e-10, 1e-8)?;
    Ok(r.value.max(0.0))
}

/// Validity bound for the double-IG MGF (piecewise, from both radicands).
pub fn double_ig_mgf_bound(outer: &IGParams, inner: &IGParams) -> f64 {
    let (mt, lt) = (outer.mu, outer.lambda);
    let (mu_i, lu) = (inner.mu, inner.lambda);
    let inner_bound = lt / (2.0 * mt * mt);
    let c = lu * mt / (2.0 * mu_i * mu_i * lt);
    if c >= 1.0 {
        inner_bound
    } else {
        inner_bound.min(lu / (2.0 * mu_i * mu_i) * (1.0 / mt - lu / (4.0 * mu_i * mu_i * lt)))
    }
}

/// MGF of the double-IG clock (nested square roots), valid on
/// `(-inf, double_ig_mgf_bound]`.
pub fn double_ig_mgf(outer: &IGParams, inner: &IGParams, v: f64) -> Result<f64> {
    let bound = double_ig_mgf_bound(outer, inner);
    if !(v <= bound) {
        return Err(Error::domain(format!(
            "double_ig_mgf: v must be <= {bound}, got {v}"
        )));
    }
    let (mt, lt) = (outer.mu, outer.lambda);
    let (mu_i, lu) = (inner.mu, inner.lambda);
    let inner_sqrt = (1.0 - 2.0 * mt * mt * v / lt).sqrt();
    let outer_rad = 1.0 - 2.0 * mu_i * mu_i / lu * (lt / mt) * (1.0 - inner_sqrt);
    Ok((lu / mu_i * (1.0 - outer_rad.sqrt())).exp())
}

/// Characteristic function of the double-IG clock (the MGF continued to the
/// imaginary axis; radicands stay in the right half plane for real v).
pub fn double_ig_chf(outer: &IGParams, inner: &IGParams, v: f64) -> Complex64 {
    let (mt, lt) = (outer.mu, outer.lambda);
    let (mu_i, lu) = (inner.mu, inner.lambda);
    let iv = Complex64::new(0.0, v);
    let inner_sqrt = (Complex64::new(1.0, 0.0) - 2.0 * mt * mt / lt * iv).sqrt();
    let outer_rad =
        Complex64::new(1.0, 0.0) - 2.0 * mu_i * mu_i / lu * (lt / mt) * (1.0 - inner_sqrt);
    (lu / mu_i * (1.0 - outer_rad.sqrt())).exp()
}

/// Closed-form moments of the double-IG clock, written through
/// `p = mu_U^2/lambda_U` and `q = mu_T/lambda_T`.
pub fn double_ig_moments(outer: &IGParams, inner: &IGParams) -> Moments {
    let (mt, _lt) = (outer.mu, outer.lambda);
    let (mu_i, _lu) = (inner.mu, inner.lambda);
    let p = mu_i * mu_i / inner.lambda;
    let q = mt / outer.lambda;
    let mean = mt * mu_i;
    let variance = mt * mt * mu_i * (p + q);
    let skewness = 3.0 * (p * p + p * q + q * q) / (mu_i.sqrt() * (p + q).powf(1.5));
    let excess_kurtosis = 3.0
        * (5.0 * p.powi(3) + 6.0 * p * p * q + 5.0 * p * q * q + 5.0 * q.powi(3))
        / (mu_i * (p + q) * (p + q));
    Moments {
        mean,
        variance,
        skewness,
        excess_kurtosis,
    }
}

/// Characteristic function of the n-fold IG clock by the recursion
/// `phi_n(v) = exp((lambda_n/mu_n)(1 - sqrt(1 - 2 mu_n^2 ln phi_{n-1}(v) / lambda_n)))`,
/// carried on exponents so no logarithm of a wound-up complex value is taken.
/// Chain order matches [`CompoundChain`]: index 0 outermost.
pub fn multi_ig_chf(chain: &[IGParams], v: f64) -> Result<Complex64> {
    if chain.is_empty() {
        return Err(Error::domain("IG chain must be nonempty"));
    }
    let mut w = Complex64::new(0.0, v);
    for p in chain {
        w = BaseLaw::Ig(*p).cumulant_transform(w);
    }
    Ok(w.exp())
}

/// Draws of the unit increment of a compound clock.
pub fn sample_compound(chain: &CompoundChain, n: usize, seed: u64) -> Vec<f64> {
    chain.sample(n, seed)
}
