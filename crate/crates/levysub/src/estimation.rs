//! Parameter estimation: closed-form inverse Gaussian maximum likelihood,
//! empirical-characteristic-function fitting with method-of-moments
//! initialization and multi-start simplex minimization, and FFT-based
//! log-likelihood for model ranking.
//!
//! Compound clocks carry exact scale invariances (rescaling one level while
//! counter-scaling its neighbour leaves the observed law untouched), so a
//! fit only identifies the law up to those gauges. The fitter therefore
//! supports fixing any named parameter; recovery experiments pin the level
//! means and estimate the rest.

use crate::compound::{double_ig_chf, BaseLaw};
use crate::error::{Error, Result};
use crate::logprice::{ncig_chf, ncig_moments, LogPriceParams};
use crate::numerics::fft::{chf_to_pdf_fft, FftConfig};
use crate::subordinators::IGParams;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Weight applied to the squared chf distance across frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EcfWeight {
    /// `exp(-r^2 / (2 scale^2))`; `None` uses the reciprocal of the sample
    /// standard deviation.
    Gaussian { scale: Option<f64> },
    /// Flat weight over the frequency grid.
    TruncatedUniform,
}

/// Configuration of the ECF objective and the surrounding optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcfConfig {
    /// Number of positive frequencies in the grid.
    pub freq_count: usize,
    /// Frequency span; `None` scales it as `4 / sigma_hat`.
    pub freq_span: Option<f64>,
    pub weight: EcfWeight,
    /// Random restarts around the initialization (the first start is the
    /// initialization itself).
    pub restarts: usize,
    /// Simplex iteration budget per start.
    pub max_iterations: usize,
    /// Convergence tolerance on the simplex objective spread.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for EcfConfig {
    fn default() -> Self {
        EcfConfig {
            freq_count: 64,
            freq_span: None,
            weight: EcfWeight::Gaussian { scale: None },
            restarts: 16,
            max_iterations: 600,
            tolerance: 1e-12,
            seed: 0,
        }
    }
}

impl EcfConfig {
    fn validate(&self) -> Result<()> {
        if let Some(s) = self.freq_span {
            if !(s >= 0.0) {
                return Err(Error::domain("freq_span must be >= 0"));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("tolerance must be > 0"));
        }
        Ok(())
    }
}

/// Models the ECF fitter understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// Single inverse Gaussian law (closed-form MLE, no ECF needed).
    Ig,
    /// Compound (double) inverse Gaussian clock observed directly.
    Cig,
    /// Normal-compound-inverse-Gaussian return law.
    Ncig,
}

impl FitModel {
    pub fn tag(&self) -> &'static str {
        match self {
            FitModel::Ig => "ig",
            FitModel::Cig => "cig",
            FitModel::Ncig => "ncig",
        }
    }
}

/// Convergence status of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Converged,
    BudgetExhausted,
    Failed,
}

/// Outcome of an estimation run.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    pub objective: f64,
    pub loglik: f64,
    pub loglik_outside: usize,
    pub init: BTreeMap<String, f64>,
    pub init_source: &'static str,
    pub status: FitStatus,
    pub evaluations: usize,
}

impl FitResult {
    /// Characteristic function of the fitted law.
    pub fn chf(&self, v: f64) -> Complex64 {
        model_chf(self.model, &self.params, v)
    }

    pub fn density_grid(&self, cfg: &FftConfig) -> Result<crate::numerics::fft::DensityGrid> {
        chf_to_pdf_fft(|v| self.chf(v), cfg)
    }
}

/// Closed-form inverse Gaussian maximum likelihood:
/// `mu = mean`, `lambda = n / sum(1/x_i - 1/mean)`.
pub fn ig_mle(data: &[f64]) -> Result<IGParams> {
    if data.len() < 2 {
        return Err(Error::Estimation("ig_mle needs at least 2 observations".into()));
    }
    if data.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Estimation("ig_mle needs strictly positive data".into()));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let denom: f64 = data.iter().map(|&x| 1.0 / x - 1.0 / mean).sum();
    if !(denom > 0.0) {
        return Err(Error::Estimation(
            "ig_mle: degenerate data (reciprocal spread is nonpositive)".into(),
        ));
    }
    IGParams::new(mean, n / denom)
}

/// Precomputed empirical characteristic function on a weighted grid.
struct EcfGrid {
    freqs: Vec<f64>,
    weights: Vec<f64>,
    ecf: Vec<Complex64>,
}

fn sample_sd(data: &[f64]) -> f64 {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    (data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn build_ecf_grid(data: &[f64], cfg: &EcfConfig) -> EcfGrid {
    let sd = sample_sd(data).max(1e-300);
    let span = cfg.freq_span.unwrap_or(4.0 / sd);
    let m = cfg.freq_count;
    if m == 0 || span == 0.0 {
        return EcfGrid {
            freqs: vec![],
            weights: vec![],
            ecf: vec![],
        };
    }
    let dr = span / m as f64;
    let freqs: Vec<f64> = (1..=m).map(|j| j as f64 * dr).collect();
    let mut weights: Vec<f64> = match cfg.weight {
        EcfWeight::Gaussian { scale } => {
            let s = scale.unwrap_or(1.0 / sd);
            freqs.iter().map(|&r| (-r * r / (2.0 * s * s)).exp()).collect()
        }
        EcfWeight::TruncatedUniform => vec![1.0; m],
    };
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    // incremental rotations: one cis per observation, m complex multiplies
    let mut ecf = vec![Complex64::new(0.0, 0.0); m];
    for &x in data {
        let step = Complex64::from_polar(1.0, dr * x);
        let mut z = step;
        for e in ecf.iter_mut() {
            *e += z;
            z *= step;
        }
    }
    let n = data.len() as f64;
    for e in ecf.iter_mut() {
        *e /= n;
    }
    EcfGrid { freqs, weights, ecf }
}

fn objective_on_grid<F: Fn(f64) -> Complex64>(chf: &F, grid: &EcfGrid) -> f64 {
    grid.freqs
        .iter()
        .zip(&grid.weights)
        .zip(&grid.ecf)
        .map(|((&r, &w), &e)| {
            let d = e - chf(r);
            w * d.norm_sqr()
        })
        .sum()
}

/// Weighted integrated squared distance between the empirical chf of `data`
/// and the model chf, discretized on the configured frequency grid (weights
/// normalized to unit mass). Zero when the two coincide on the grid.
pub fn ecf_objective<F: Fn(f64) -> Complex64>(
    chf: F,
    data: &[f64],
    cfg: &EcfConfig,
) -> Result<f64> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Estimation("ecf_objective needs data".into()));
    }
    let grid = build_ecf_grid(data, cfg);
    Ok(objective_on_grid(&chf, &grid))
}

// ---------------------------------------------------------------------------
// Parameter space plumbing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct ParamDef {
    name: &'static str,
    log_scale: bool,
    lo: f64,
    hi: f64,
}

const SCALE_LO: f64 = 1e-8;
const SCALE_HI: f64 = 1e8;

fn param_defs(model: FitModel) -> &'static [ParamDef] {
    const IG: &[ParamDef] = &[
        ParamDef { name: "mu", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
        ParamDef { name: "lambda", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
    ];
    const CIG: &[ParamDef] = &[
        ParamDef { name: "t_mu", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
        ParamDef { name: "t_lambda", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
        ParamDef { name: "u_mu", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
        ParamDef { name: "u_lambda", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
    ];
    const NCIG: &[ParamDef] = &[
        ParamDef { name: "mu", log_scale: false, lo: -10.0, hi: 10.0 },
        ParamDef { name: "gamma", log_scale: false, lo: -10.0, hi: 10.0 },
        ParamDef { name: "rho", log_scale: false, lo: -10.0, hi: 10.0 },
        ParamDef { name: "sigma", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
        ParamDef { name: "t_mu", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
        ParamDef { name: "t_lambda", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
        ParamDef { name: "u_mu", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
        ParamDef { name: "u_lambda", log_scale: true, lo: SCALE_LO, hi: SCALE_HI },
    ];
    match model {
        FitModel::Ig => IG,
        FitModel::Cig => CIG,
        FitModel::Ncig => NCIG,
    }
}

fn model_chf(model: FitModel, params: &BTreeMap<String, f64>, v: f64) -> Complex64 {
    let get = |k: &str| params[k];
    match model {
        FitModel::Ig => {
            let p = IGParams {
                mu: get("mu"),
                lambda: get("lambda"),
            };
            BaseLaw::Ig(p).cumulant_transform(Complex64::new(0.0, v)).exp()
        }
        FitModel::Cig => {
            let t = IGParams { mu: get("t_mu"), lambda: get("t_lambda") };
            let u = IGParams { mu: get("u_mu"), lambda: get("u_lambda") };
            double_ig_chf(&t, &u, v)
        }
        FitModel::Ncig => {
            let p = LogPriceParams {
                mu: get("mu"),
                gamma: get("gamma"),
                rho: get("rho"),
                sigma: get("sigma"),
            };
            let t = IGParams { mu: get("t_mu"), lambda: get("t_lambda") };
            let u = IGParams { mu: get("u_mu"), lambda: get("u_lambda") };
            ncig_chf(&p, &t, &u, v)
        }
    }
}

fn moments4(data: &[f64]) -> (f64, f64, f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in data {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (mean, m2, m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Method-of-moments initialization. `fixed` entries are copied into the
/// output untouched and also anchor the scale gauges (for the compound
/// models, fixing the level means is what makes the rest identifiable).
pub fn mom_init(
    model: FitModel,
    data: &[f64],
    fixed: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    if data.len() < 8 {
        return Err(Error::Estimation("mom_init needs at least 8 observations".into()));
    }
    let (mean, var, skew, exkurt) = moments4(data);
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    match model {
        FitModel::Ig => {
            if !(mean > 0.0) || !(var > 0.0) {
                return Err(Error::Estimation("IG moments need positive data".into()));
            }
            out.insert("mu".into(), mean);
            out.insert("lambda".into(), mean.powi(3) / var);
        }
        FitModel::Cig => {
            if !(mean > 0.0) || !(var > 0.0) || !(skew > 0.0) {
                return Err(Error::Estimation(
                    "compound-IG moment matching needs positive mean, variance and skewness"
                        .into(),
                ));
            }
            // gauge: the inner clock mean; the compound law is invariant to
            // trading scale between levels, so it cannot be inferred
            let u_mu = fixed.get("u_mu").copied().unwrap_or(mean);
            let t_mu = fixed.get("t_mu").copied().unwrap_or(mean / u_mu);
            // with p = u_mu^2/u_lambda and q = t_mu/t_lambda:
            //   var  = mean * t_mu * (p + q)
            //   skew = 3 (p^2 + pq + q^2) / (sqrt(u_mu) S^{3/2}),  S = p + q
            let s = var / (mean * t_mu);
            let g = skew * u_mu.sqrt() * s.powf(1.5) / 3.0;
            let disc = 4.0 * g - 3.0 * s * s;
            let (p, q) = if disc > 0.0 {
                let r1 = 0.5 * (s + disc.sqrt());
                let r2 = 0.5 * (s - disc.sqrt());
                if r1 > 0.0 && r2 > 0.0 {
                    // two assignments; pick the one matching excess kurtosis
                    let ek = |p: f64, q: f64| {
                        3.0 * (5.0 * p.powi(3)
                            + 6.0 * p * p * q
                            + 5.0 * p * q * q
                            + 5.0 * q.powi(3))
                            / (u_mu * s * s)
                    };
                    if (ek(r1, r2) - exkurt).abs() <= (ek(r2, r1) - exkurt).abs() {
                        (r1, r2)
                    } else {
                        (r2, r1)
                    }
                } else {
                    (0.5 * s, 0.5 * s)
                }
            } else {
                (0.5 * s, 0.5 * s)
            };
            out.insert("t_mu".into(), t_mu);
            out.insert("t_lambda".into(), t_mu / q);
            out.insert("u_mu".into(), u_mu);
            out.insert("u_lambda".into(), u_mu * u_mu / p);
        }
        FitModel::Ncig => {
            if !(var > 0.0) {
                return Err(Error::Estimation("degenerate sample variance".into()));
            }
            let u_mu = fixed.get("u_mu").copied().unwrap_or(1.0);
            let t_mu = fixed.get("t_mu").copied().unwrap_or(1.0);
            let gamma0 = fixed.get("gamma").copied().unwrap_or(0.0);
            let sol = ncig_match_moments(var, skew, exkurt, t_mu, u_mu, gamma0);
            let rho = fixed.get("rho").copied().unwrap_or(sol.rho);
            out.insert("mu".into(), mean - t_mu * u_mu * rho - u_mu * gamma0);
            out.insert("gamma".into(), gamma0);
            out.insert("rho".into(), rho);
            out.insert("sigma".into(), sol.sigma);
            out.insert("t_mu".into(), t_mu);
            out.insert("t_lambda".into(), sol.t_lambda);
            out.insert("u_mu".into(), u_mu);
            out.insert("u_lambda".into(), sol.u_lambda);
        }
    }
    for (k, v) in fixed {
        out.insert(k.clone(), *v);
    }
    clamp_into_bounds(model, &mut out);
    Ok(out)
}

struct NcigInit {
    rho: f64,
    sigma: f64,
    t_lambda: f64,
    u_lambda: f64,
}

/// Match variance exactly and skewness/excess kurtosis as closely as a
/// nested scan allows, with the level means already pinned.
///
/// Free parameters are reduced to (rho, share, split): `share` is the
/// fraction of the variance carried by the loading terms and `split` its
/// division between the two levels; sigma then balances the variance
/// identity exactly and (rho, share, split) chase skewness and kurtosis.
fn ncig_match_moments(
    var: f64,
    skew: f64,
    exkurt: f64,
    t_mu: f64,
    u_mu: f64,
    gamma0: f64,
) -> NcigInit {
    let clock_mean = t_mu * u_mu;
    let assemble = |rho: f64, share: f64, split: f64| -> Option<(NcigInit, f64, f64)> {
        let resid = share * var;
        let r2 = rho * rho;
        if r2 < 1e-30 {
            return None;
        }
        // loading-variance terms: u_mu rho^2 t_mu^3 / t_lambda  and
        // u_mu^3 (gamma + rho t_mu)^2 / u_lambda
        let t_lambda = u_mu * r2 * t_mu.powi(3) / (split * resid);
        let load = gamma0 + rho * t_mu;
        let u_lambda = if load.abs() < 1e-30 {
            SCALE_HI
        } else {
            (u_mu.powi(3) * load * load / ((1.0 - split) * resid)).clamp(SCALE_LO, SCALE_HI)
        };
        let t_lambda = t_lambda.clamp(SCALE_LO, SCALE_HI);
        let sigma2 = (var
            - u_mu * r2 * t_mu.powi(3) / t_lambda
            - u_mu.powi(3) * load * load / u_lambda)
            / clock_mean;
        if !(sigma2 > 0.0) {
            return None;
        }
        let p = LogPriceParams {
            mu: 0.0,
            gamma: gamma0,
            rho,
            sigma: sigma2.sqrt(),
        };
        let t = IGParams { mu: t_mu, lambda: t_lambda };
        let u = IGParams { mu: u_mu, lambda: u_lambda };
        let m = ncig_moments(&p, &t, &u);
        let law = crate::logprice::ReturnLaw::ncig(&p, &t, &u).ok()?;
        let ek = law.cumulants().ok()?.excess_kurtosis();
        Some((
            NcigInit {
                rho,
                sigma: sigma2.sqrt(),
                t_lambda,
                u_lambda,
            },
            m.skewness,
            ek,
        ))
    };
    // exactly symmetric data: a pure-diffusion start with the clock
    // dispersion tuned to the kurtosis
    if skew.abs() < 1e-10 {
        let w = (exkurt / 3.0).max(1e-6);
        return NcigInit {
            rho: 0.0,
            sigma: (var / clock_mean).sqrt(),
            t_lambda: (2.0 * t_mu / (w * u_mu)).clamp(SCALE_LO, SCALE_HI),
            u_lambda: (2.0 * u_mu / w).clamp(SCALE_LO, SCALE_HI),
        };
    }
    let rho_scale = (var.sqrt() / clock_mean).max(1e-8);
    let mut best: Option<(f64, NcigInit)> = None;
    for k in -6..=6 {
        let rho = skew.signum() * rho_scale * (2.0f64).powi(k) * skew.abs().max(0.05);
        for share_i in 1..=9 {
            let share = share_i as f64 * 0.1;
            for split_i in 1..=4 {
                let split = split_i as f64 * 0.2;
                if let Some((init, s, ek)) = assemble(rho, share, split) {
                    let err = ((s - skew) / skew.abs().max(0.05)).powi(2)
                        + ((ek - exkurt) / exkurt.abs().max(0.5)).powi(2);
                    if best.as_ref().map(|(e, _)| err < *e).unwrap_or(true) {
                        best = Some((err, init));
                    }
                }
            }
        }
    }
    // symmetric data: fall back to a pure-diffusion start
    best.map(|(_, init)| init).unwrap_or(NcigInit {
        rho: 0.0,
        sigma: (var / clock_mean).sqrt(),
        t_lambda: t_mu,
        u_lambda: u_mu,
    })
}

fn clamp_into_bounds(model: FitModel, params: &mut BTreeMap<String, f64>) {
    for def in param_defs(model) {
        if let Some(v) = params.get_mut(def.name) {
            *v = v.clamp(def.lo, def.hi);
        }
    }
}

/// Fallback starting point when moment matching is infeasible: a unit-ish
/// instructed guess scaled to the data.
fn instructed_guess(model: FitModel, data: &[f64]) -> BTreeMap<String, f64> {
    let (mean, var, _, _) = moments4(data);
    let mut out = BTreeMap::new();
    match model {
        FitModel::Ig => {
            let m = mean.abs().max(1e-6);
            out.insert("mu".into(), m);
            out.insert("lambda".into(), (m.powi(3) / var.max(1e-12)).max(1e-6));
        }
        FitModel::Cig => {
            let m = mean.abs().max(1e-6).sqrt();
            out.insert("t_mu".into(), m);
            out.insert("t_lambda".into(), m);
            out.insert("u_mu".into(), m);
            out.insert("u_lambda".into(), m);
        }
        FitModel::Ncig => {
            out.insert("mu".into(), mean);
            out.insert("gamma".into(), 0.0);
            out.insert("rho".into(), 0.0);
            out.insert("sigma".into(), var.sqrt().max(1e-6));
            out.insert("t_mu".into(), 1.0);
            out.insert("t_lambda".into(), 1.0);
            out.insert("u_mu".into(), 1.0);
            out.insert("u_lambda".into(), 1.0);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Nelder-Mead simplex with box-constrained reflection
// ---------------------------------------------------------------------------

fn reflect_into_box(z: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..z.len() {
        if z[i] < lo[i] {
            z[i] = (2.0 * lo[i] - z[i]).min(hi[i]);
        } else if z[i] > hi[i] {
            z[i] = (2.0 * hi[i] - z[i]).max(lo[i]);
        }
        z[i] = z[i].clamp(lo[i], hi[i]);
    }
}

struct NmOutcome {
    x: Vec<f64>,
    fx: f64,
    evaluations: usize,
    converged: bool,
}

fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    step: f64,
    max_iterations: usize,
    ftol: f64,
) -> NmOutcome {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step * (1.0 + p[i].abs() * 0.0).max(1.0) * if p[i] + step > hi[i] { -1.0 } else { 1.0 };
        reflect_into_box(&mut p, lo, hi);
        simplex.push(p);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    let (alpha, gamma, beta, delta) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    for _ in 0..max_iterations {
        // order ascending
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        let reorder: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let fre: Vec<f64> = idx.iter().map(|&i| fv[i]).collect();
        simplex = reorder;
        fv = fre;

        if (fv[n] - fv[0]).abs() <= ftol * (1.0 + fv[0].abs()) {
            converged = true;
            break;
        }
        // centroid of all but worst
        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for i in 0..n {
                centroid[i] += p[i] / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let mut xr: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - worst[i]))
            .collect();
        reflect_into_box(&mut xr, lo, hi);
        let fr = eval(&xr, &mut evals);
        if fr < fv[0] {
            let mut xe: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (xr[i] - centroid[i]))
                .collect();
            reflect_into_box(&mut xe, lo, hi);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if fr < fv[n - 1] {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            // contraction
            let (base, fbase) = if fr < fv[n] {
                (xr.clone(), fr)
            } else {
                (worst.clone(), fv[n])
            };
            let mut xc: Vec<f64> = (0..n)
                .map(|i| centroid[i] + beta * (base[i] - centroid[i]))
                .collect();
            reflect_into_box(&mut xc, lo, hi);
            let fc = eval(&xc, &mut evals);
            if fc < fbase {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                // shrink toward best
                for j in 1..=n {
                    for i in 0..n {
                        simplex[j][i] = simplex[0][i] + delta * (simplex[j][i] - simplex[0][i]);
                    }
                    fv[j] = eval(&simplex[j].clone(), &mut evals);
                }
            }
        }
    }
    let mut best = 0;
    for j in 1..=n {
        if fv[j] < fv[best] {
            best = j;
        }
    }
    NmOutcome {
        x: simplex[best].clone(),
        fx: fv[best],
        evaluations: evals,
        converged,
    }
}

// ---------------------------------------------------------------------------
// The fitter
// ---------------------------------------------------------------------------

/// FFT log-likelihood report.
#[derive(Debug, Clone, Copy)]
pub struct LoglikFft {
    pub value: f64,
    /// Observations that fell outside the density grid (floored at 1e-300).
    pub outside: usize,
}

/// `sum ln pdf(x_i)` with the density recovered from the chf by FFT
/// inversion and linearly interpolated. Requires the grid to cover the data
/// range with at least 6 grid spacings of margin; more than 0.1% of points
/// outside is an error.
pub fn loglik_fft<F: Fn(f64) -> Complex64>(
    chf: F,
    data: &[f64],
    cfg: &FftConfig,
) -> Result<LoglikFft> {
    if data.is_empty() {
        return Err(Error::Estimation("loglik_fft needs data".into()));
    }
    let grid = chf_to_pdf_fft(&chf, cfg)?;
    let margin = 6.0 * grid.dx();
    let (lo, hi) = (grid.x0() + margin, grid.x_max() - margin);
    let outside = data.iter().filter(|&&x| x < lo || x > hi).count();
    if outside as f64 > 0.001 * data.len() as f64 {
        return Err(Error::GridCoverage {
            outside,
            total: data.len(),
        });
    }
    let mut ll = 0.0;
    for &x in data {
        let p = grid.pdf_at(x).max(1e-300);
        ll += p.ln();
    }
    Ok(LoglikFft { value: ll, outside })
}

/// Multi-start ECF fit. `fixed` pins named parameters (gauge anchors or
/// a-priori zeros); everything else is free within its bounds.
pub fn ecf_fit(
    model: FitModel,
    data: &[f64],
    cfg: &EcfConfig,
    fixed: &BTreeMap<String, f64>,
) -> Result<FitResult> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Estimation("ecf_fit needs data".into()));
    }
    if model == FitModel::Ig {
        return ig_fit_via_mle(data, cfg, fixed);
    }
    let defs = param_defs(model);
    let (init, init_source) = match mom_init(model, data, fixed) {
        Ok(m) => (m, "method-of-moments"),
        Err(_) => {
            let mut g = instructed_guess(model, data);
            for (k, v) in fixed {
                g.insert(k.clone(), *v);
            }
            clamp_into_bounds(model, &mut g);
            (g, "instructed-guess")
        }
    };
    let free: Vec<&ParamDef> = defs.iter().filter(|d| !fixed.contains_key(d.name)).collect();
    if free.is_empty() {
        return Err(Error::Estimation("no free parameters to fit".into()));
    }
    let grid = build_ecf_grid(data, cfg);
    if grid.freqs.is_empty() {
        return Err(Error::Estimation(
            "ecf_fit needs a nonempty frequency grid".into(),
        ));
    }

    // transform into optimizer coordinates
    let to_z = |name: &str, x: f64, log: bool| {
        let _ = name;
        if log {
            x.max(SCALE_LO).ln()
        } else {
            x
        }
    };
    let z0: Vec<f64> = free
        .iter()
        .map(|d| to_z(d.name, init[d.name], d.log_scale))
        .collect();
    let lo: Vec<f64> = free.iter().map(|d| if d.log_scale { d.lo.ln() } else { d.lo }).collect();
    let hi: Vec<f64> = free.iter().map(|d| if d.log_scale { d.hi.ln() } else { d.hi }).collect();

    let assemble = |z: &[f64]| -> BTreeMap<String, f64> {
        let mut p = init.clone();
        for (d, &zi) in free.iter().zip(z) {
            p.insert(d.name.into(), if d.log_scale { zi.exp() } else { zi });
        }
        p
    };
    let mut total_evals = 0usize;
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for start in 0..=cfg.restarts {
        let mut z_start = z0.clone();
        if start > 0 {
            for z in z_start.iter_mut() {
                *z += rng.random::<f64>() - 0.5;
            }
            reflect_into_box(&mut z_start, &lo, &hi);
        }
        let outcome = nelder_mead(
            |z| {
                let p = assemble(z);
                objective_on_grid(&|v| model_chf(model, &p, v), &grid)
            },
            &z_start,
            &lo,
            &hi,
            0.15,
            cfg.max_iterations,
            cfg.tolerance,
        );
        total_evals += outcome.evaluations;
        let better = match &best {
            None => true,
            Some((_, f, _)) => outcome.fx < *f,
        };
        if better {
            best = Some((outcome.x, outcome.fx, outcome.converged));
        }
    }
    let (z_best, objective, converged) = best.ok_or_else(|| {
        Error::Estimation("all optimization starts failed".into())
    })?;
    if !objective.is_finite() {
        return Err(Error::Estimation("all optimization starts failed".into()));
    }
    let params = assemble(&z_best);
    let ll = loglik_fft(
        |v| model_chf(model, &params, v),
        data,
        &FftConfig::default(),
    );
    let (loglik, outside) = match ll {
        Ok(l) => (l.value, l.outside),
        Err(_) => (f64::NEG_INFINITY, data.len()),
    };
    Ok(FitResult {
        model,
        params,
        objective,
        loglik,
        loglik_outside: outside,
        init,
        init_source,
        status: if converged {
            FitStatus::Converged
        } else {
            FitStatus::BudgetExhausted
        },
        evaluations: total_evals,
    })
}

fn ig_fit_via_mle(
    data: &[f64],
    cfg: &EcfConfig,
    fixed: &BTreeMap<String, f64>,
) -> Result<FitResult> {
    let mle = ig_mle(data)?;
    let mut params = BTreeMap::new();
    params.insert("mu".to_string(), mle.mu);
    params.insert("lambda".to_string(), mle.lambda);
    for (k, v) in fixed {
        params.insert(k.clone(), *v);
    }
    let objective = ecf_objective(
        |v| model_chf(FitModel::Ig, &params, v),
        data,
        cfg,
    )?;
    let ll = loglik_fft(
        |v| model_chf(FitModel::Ig, &params, v),
        data,
        &FftConfig::default(),
    )?;
    Ok(FitResult {
        model: FitModel::Ig,
        params: params.clone(),
        objective,
        loglik: ll.value,
        loglik_outside: ll.outside,
        init: params,
        init_source: "maximum-likelihood",
        status: FitStatus::Converged,
        evaluations: 0,
    })
}
