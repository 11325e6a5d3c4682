//! The unconditional return law, its scaled form and the collapse transform.
//!
//! Mixing the Gaussian `p(r, τ | β)` over the gamma law of β gives
//!
//! ```text
//! P(r, τ) = Γ((n+1)/2) / Γ(n/2) · sqrt(β₀ / (π n τ)) · (1 + β₀ r² / (n τ))^{-(n+1)/2}
//! ```
//!
//! In the scaled variable `r' = r · sqrt(2β₀ / (n τ))` the density no longer
//! depends on `β₀` or `τ`, and `f(r') = [Λ P'(r')]^{2/(n+1)}` with
//! `Λ = sqrt(2π) Γ(n/2) / Γ((n+1)/2)` reduces to `1 / (1 + r'²/2)` for every
//! `n`. Here `P'` is the density of `r'` itself, not the raw-return density
//! evaluated at `r'`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimation::GammaFit;
use crate::marketdata::ReturnSeries;
use crate::specfun::{find_root, ln_gamma_unchecked, reg_inc_beta_split};

/// Number of logarithmic |r'| bins used by [`empirical_collapse`].
pub const COLLAPSE_BINS: usize = 61;
/// Lower edge of the first collapse bin.
pub const COLLAPSE_MIN_ABS: f64 = 1e-2;
/// Smallest return sample [`empirical_collapse`] accepts.
pub const COLLAPSE_MIN_RETURNS: usize = 100;
/// Default number of points on an empirical CCD grid.
pub const DEFAULT_CCD_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: f64,
    pub beta0: f64,
    pub tau: usize,
}

impl ModelParams {
    pub fn new(n: f64, beta0: f64, tau: usize) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Invalid(format!("n must be finite and > 0, got {n}")));
        }
        if !(beta0.is_finite() && beta0 > 0.0) {
            return Err(Error::Invalid(format!("beta0 must be finite and > 0, got {beta0}")));
        }
        if tau == 0 {
            return Err(Error::Invalid("tau must be >= 1".into()));
        }
        Ok(Self { n, beta0, tau })
    }

    pub fn from_fit(fit: &GammaFit, tau: usize) -> Result<Self> {
        Self::new(fit.n, fit.beta0, tau)
    }

    /// `β₀ / (n τ)`, the coefficient of `r²` in the density's kernel.
    fn kernel_coef(&self) -> f64 {
        self.beta0 / (self.n * self.tau as f64)
    }
}

/// `ln Γ((n+1)/2) − ln Γ(n/2)`
fn ln_gamma_ratio(n: f64) -> f64 {
    ln_gamma_unchecked(0.5 * (n + 1.0)) - ln_gamma_unchecked(0.5 * n)
}

/// Natural log of the return density.
pub fn model_ln_pdf(r: f64, params: &ModelParams) -> f64 {
    let c = params.kernel_coef();
    ln_gamma_ratio(params.n) + 0.5 * (c / PI).ln() - 0.5 * (params.n + 1.0) * (c * r * r).ln_1p()
}

/// Density of the return at horizon τ.
pub fn model_pdf(r: f64, params: &ModelParams) -> f64 {
    model_ln_pdf(r, params).exp()
}

/// Gaussian return density at fixed inverse variance β.
pub fn conditional_pdf(r: f64, tau: usize, beta: f64) -> f64 {
    let t = tau as f64;
    (beta / (2.0 * PI * t)).sqrt() * (-beta * r * r / (2.0 * t)).exp()
}

/// `r' = r · sqrt(2β₀ / (n τ))`
pub fn scale_return(r: f64, params: &ModelParams) -> f64 {
    r * (2.0 * params.kernel_coef()).sqrt()
}

/// Density of the scaled return `r'`; depends on `n` only.
pub fn scaled_pdf(r_scaled: f64, n: f64) -> f64 {
    (ln_gamma_ratio(n) - 0.5 * (2.0 * PI).ln() - 0.5 * (n + 1.0) * (0.5 * r_scaled * r_scaled).ln_1p()).exp()
}

/// P(|R'| > x) = I_{1/(1 + x²/2)}(n/2, 1/2).
pub fn model_ccd(abs_r_scaled: f64, n: f64) -> Result<f64> {
    if !(abs_r_scaled >= 0.0) {
        return Err(Error::domain(
            "model_ccd",
            format!("scaled return must be >= 0, got {abs_r_scaled}"),
        ));
    }
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::domain("model_ccd", format!("n must be finite and > 0, got {n}")));
    }
    if abs_r_scaled == 0.0 {
        return Ok(1.0);
    }
    let q = 0.5 * abs_r_scaled * abs_r_scaled;
    if q.is_infinite() {
        return Ok(0.0);
    }
    reg_inc_beta_split(1.0 / (1.0 + q), q / (1.0 + q), 0.5 * n, 0.5)
}

/// The `q` with `model_ccd(q, n) = p`.
pub fn model_quantile(p: f64, n: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(
            "model_quantile",
            format!("p must lie in (0, 1), got {p}"),
        ));
    }
    // Bracket the root by doubling.
    let mut hi = 1.0;
    while model_ccd(hi, n)? > p {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NonConvergence {
                what: "model_quantile bracket",
                iterations: 1024,
            });
        }
    }
    let lo = if hi > 1.0 { 0.5 * hi } else { 0.0 };
    let eval = |q: f64| model_ccd(q, n).map_or(f64::NAN, |c| c - p);
    let q = find_root(eval, lo, hi, 1e-15 * hi)?;
    let residual = eval(q);
    if residual.abs() > 1e-9 {
        return Err(Error::NonConvergence {
            what: "model_quantile residual",
            iterations: 0,
        });
    }
    Ok(q)
}

/// `Λ = sqrt(2π) Γ(n/2) / Γ((n+1)/2)`
pub fn collapse_lambda(n: f64) -> f64 {
    (0.5 * (2.0 * PI).ln() - ln_gamma_ratio(n)).exp()
}

/// `[Λ P]^{2/(n+1)}` for a density value `P` of the scaled return.
pub fn collapse_transform(density: f64, n: f64) -> Result<f64> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::domain(
            "collapse_transform",
            format!("density must be > 0, got {density}"),
        ));
    }
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::domain("collapse_transform", format!("n must be > 0, got {n}")));
    }
    let ln_lambda = 0.5 * (2.0 * PI).ln() - ln_gamma_ratio(n);
    Ok((2.0 / (n + 1.0) * (ln_lambda + density.ln())).exp())
}

/// The n-free curve every stock collapses onto, `1 / (1 + r'²/2)`.
pub fn master_curve(r_scaled: f64) -> f64 {
    1.0 / (1.0 + 0.5 * r_scaled * r_scaled)
}

/// Empirical or theoretical complementary cumulative distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdCurve {
    pub abscissae: Vec<f64>,
    pub ccd_values: Vec<f64>,
    /// Binomial standard error `sqrt(C (1 − C) / N)`.
    pub stderr: Vec<f64>,
    pub sample_count: usize,
    /// Abscissae are scaled returns r'.
    pub scaled: bool,
}

/// Where an empirical CCD is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum CcdGrid {
    /// `points` log-spaced abscissae from the 10th percentile of |v| to its
    /// maximum.
    LogSpaced { points: usize },
    /// Caller-chosen, strictly increasing abscissae.
    Explicit(Vec<f64>),
}

impl Default for CcdGrid {
    fn default() -> Self {
        CcdGrid::LogSpaced {
            points: DEFAULT_CCD_POINTS,
        }
    }
}

/// `points` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|i| {
                    if i + 1 == points {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (points - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// CCD of `|values|`: `C(x) = #{|v| > x} / N`.
///
/// Grid points where the count is zero are dropped, so every returned value
/// is positive.
pub fn empirical_ccd(values: &[f64], grid: &CcdGrid, scaled: bool) -> Result<CcdCurve> {
    if values.is_empty() {
        return Err(Error::InsufficientData("empirical CCD of an empty sample".into()));
    }
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    if abs.iter().any(|v| v.is_nan()) {
        return Err(Error::Invalid("empirical CCD input contains NaN".into()));
    }
    abs.sort_by(f64::total_cmp);
    let max = *abs.last().expect("non-empty");
    if max == 0.0 {
        return Err(Error::InsufficientData("all values are zero".into()));
    }
    let xs = match grid {
        CcdGrid::LogSpaced { points } => {
            let p10 = abs[abs.len() / 10];
            let lo = if p10 > 0.0 {
                p10
            } else {
                abs[abs.partition_point(|&v| v == 0.0)]
            };
            log_space(lo, max, *points)
        }
        CcdGrid::Explicit(xs) => {
            if xs.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Invalid("CCD grid must be strictly increasing".into()));
            }
            xs.clone()
        }
    };
    let total = abs.len();
    let mut curve = CcdCurve {
        abscissae: Vec::with_capacity(xs.len()),
        ccd_values: Vec::with_capacity(xs.len()),
        stderr: Vec::with_capacity(xs.len()),
        sample_count: total,
        scaled,
    };
    for x in xs {
        if curve.abscissae.last().is_some_and(|&last| x <= last) {
            continue;
        }
        let above = total - abs.partition_point(|&v| v <= x);
        if above == 0 {
            continue;
        }
        let c = above as f64 / total as f64;
        curve.abscissae.push(x);
        curve.ccd_values.push(c);
        curve.stderr.push((c * (1.0 - c) / total as f64).sqrt());
    }
    Ok(curve)
}

/// Model CCD `model_ccd(x, n)` sampled at the given scaled abscissae.
pub fn theoretical_ccd(abscissae: &[f64], n: f64) -> Result<CcdCurve> {
    let ccd_values = abscissae.iter().map(|&x| model_ccd(x, n)).collect::<Result<Vec<_>>>()?;
    Ok(CcdCurve {
        abscissae: abscissae.to_vec(),
        stderr: vec![0.0; ccd_values.len()],
        ccd_values,
        sample_count: 0,
        scaled: true,
    })
}

/// Collapse transform of a histogram of scaled returns.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseCurve {
    /// Geometric bin centers in |r'|.
    pub abscissae: Vec<f64>,
    pub f_values: Vec<f64>,
    /// Poisson error propagated through the transform.
    pub stderr: Vec<f64>,
    pub counts: Vec<usize>,
    pub tau: usize,
    pub n: f64,
    pub sample_count: usize,
}

/// The master curve sampled at `abscissae`, in collapse-curve form.
pub fn theoretical_collapse(abscissae: &[f64], n: f64) -> Result<CollapseCurve> {
    let f_values = abscissae
        .iter()
        .map(|&x| collapse_transform(scaled_pdf(x, n), n))
        .collect::<Result<Vec<_>>>()?;
    Ok(CollapseCurve {
        abscissae: abscissae.to_vec(),
        stderr: vec![0.0; f_values.len()],
        counts: vec![0; f_values.len()],
        f_values,
        tau: 0,
        n,
        sample_count: 0,
    })
}

/// Scales returns with the fitted `(n, β₀)`, histograms |r'| in
/// [`COLLAPSE_BINS`] log bins over `[1e-2, max]` pooling both signs, and maps
/// each bin's density through [`collapse_transform`]. Empty bins are omitted.
pub fn empirical_collapse(returns: &ReturnSeries, fit: &GammaFit) -> Result<CollapseCurve> {
    if returns.len() < COLLAPSE_MIN_RETURNS {
        return Err(Error::InsufficientData(format!(
            "collapse at tau={} needs at least {COLLAPSE_MIN_RETURNS} returns, got {}",
            returns.tau,
            returns.len()
        )));
    }
    let params = ModelParams::from_fit(fit, returns.tau)?;
    let scaled: Vec<f64> = returns
        .returns
        .iter()
        .map(|&r| scale_return(r, &params).abs())
        .collect();
    let max = scaled.iter().copied().fold(0.0, f64::max);
    if !(max > COLLAPSE_MIN_ABS) {
        return Err(Error::InsufficientData(format!(
            "no scaled returns above {COLLAPSE_MIN_ABS} at tau={}",
            returns.tau
        )));
    }
    let edges = log_space(COLLAPSE_MIN_ABS, max, COLLAPSE_BINS + 1);
    let (ln_lo, ln_hi) = (COLLAPSE_MIN_ABS.ln(), max.ln());
    let mut counts = vec![0usize; COLLAPSE_BINS];
    for &x in &scaled {
        if x < COLLAPSE_MIN_ABS {
            continue;
        }
        let guess = ((x.ln() - ln_lo) / (ln_hi - ln_lo) * COLLAPSE_BINS as f64) as usize;
        let mut bin = guess.min(COLLAPSE_BINS - 1);
        // Settle rounding at the edges against the edge values themselves.
        while bin > 0 && x < edges[bin] {
            bin -= 1;
        }
        while bin + 1 < COLLAPSE_BINS && x >= edges[bin + 1] {
            bin += 1;
        }
        counts[bin] += 1;
    }
    let total = scaled.len() as f64;
    let exponent = 2.0 / (fit.n + 1.0);
    let mut curve = CollapseCurve {
        abscissae: Vec::new(),
        f_values: Vec::new(),
        stderr: Vec::new(),
        counts: Vec::new(),
        tau: returns.tau,
        n: fit.n,
        sample_count: scaled.len(),
    };
    for (bin, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let width = edges[bin + 1] - edges[bin];
        let density = count as f64 / (2.0 * total * width);
        let f = collapse_transform(density, fit.n)?;
        curve.abscissae.push((edges[bin] * edges[bin + 1]).sqrt());
        curve.f_values.push(f);
        curve.stderr.push(f * exponent / (count as f64).sqrt());
        curve.counts.push(count);
    }
    Ok(curve)
}
