//! Daily inverse-variance measurement and the gamma maximum-likelihood fit.
//!
//! The gamma law is parameterized by `n` (shape `n/2`) and its mean `beta0`:
//!
//! ```text
//! g(β) = (n / 2β₀)^{n/2} β^{n/2 - 1} exp(-nβ / 2β₀) / Γ(n/2)
//! ```

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::{extract_returns, MidPriceSeries};
use crate::specfun::{digamma_unchecked, ln_gamma_unchecked, reg_upper_inc_gamma, trigamma_unchecked};

/// Days with fewer unit returns than this are left out of the β sample.
pub const DEFAULT_MIN_EVENTS: usize = 50;
/// Smallest sample [`fit_gamma`] accepts.
pub const MIN_FIT_OBSERVATIONS: usize = 30;

const SHAPE_BRACKET: (f64, f64) = (1e-3, 1e3);
const MAX_NEWTON_ITER: usize = 100;
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyBeta {
    pub day: NaiveDate,
    /// Inverse variance per event-time unit.
    pub beta: f64,
    /// Number of τ = 1 returns the estimate used.
    pub n_events: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DailyBetaReport {
    pub betas: Vec<DailyBeta>,
    /// Days left out, with their return counts.
    pub skipped: Vec<(NaiveDate, usize)>,
}

/// Measures β once per day as `N / Σ r²` over the day's τ = 1 returns.
pub fn daily_beta(series: &MidPriceSeries, min_events: usize) -> Result<DailyBetaReport> {
    let returns = extract_returns(series, 1)?;
    let mut sums = vec![(0usize, 0.0f64); series.n_days()];
    for (r, &d) in returns.returns.iter().zip(&returns.source_day) {
        sums[d].0 += 1;
        sums[d].1 += r * r;
    }
    let mut report = DailyBetaReport::default();
    for (&day, (count, sum_sq)) in series.days().iter().zip(sums) {
        if count < min_events.max(1) || sum_sq <= 0.0 {
            report.skipped.push((day, count));
        } else {
            report.betas.push(DailyBeta {
                day,
                beta: count as f64 / sum_sq,
                n_events: count,
            });
        }
    }
    if report.betas.is_empty() {
        return Err(Error::InsufficientData(format!(
            "none of {} days has at least {min_events} unit returns",
            series.n_days()
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub n: f64,
    pub beta0: f64,
    pub n_days: usize,
    pub log_likelihood: f64,
}

impl GammaFit {
    /// A fit with known parameters and no sample behind it.
    pub fn from_params(n: f64, beta0: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0 && beta0.is_finite() && beta0 > 0.0) {
            return Err(Error::Invalid(format!(
                "gamma parameters must be positive: n={n}, beta0={beta0}"
            )));
        }
        Ok(Self {
            n,
            beta0,
            n_days: 0,
            log_likelihood: f64::NAN,
        })
    }

    pub fn shape(&self) -> f64 {
        0.5 * self.n
    }
}

/// Summary statistics the likelihood depends on.
#[derive(Debug, Clone, Copy)]
struct Moments {
    count: usize,
    mean: f64,
    mean_ln: f64,
    variance: f64,
}

fn moments(values: &[f64]) -> Result<Moments> {
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Invalid(format!("gamma observations must be positive, got {v}")));
    }
    let count = values.len();
    let n = count as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mean_ln = values.iter().map(|v| v.ln()).sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Moments {
        count,
        mean,
        mean_ln,
        variance,
    })
}

fn log_likelihood_from(m: &Moments, shape: f64, mean: f64) -> f64 {
    let rate = shape / mean;
    m.count as f64 * (shape * rate.ln() - ln_gamma_unchecked(shape) + (shape - 1.0) * m.mean_ln - rate * m.mean)
}

/// Log-likelihood of `values` under the gamma law with parameters `(n, beta0)`.
pub fn gamma_log_likelihood(values: &[f64], n: f64, beta0: f64) -> Result<f64> {
    GammaFit::from_params(n, beta0)?;
    Ok(log_likelihood_from(&moments(values)?, 0.5 * n, beta0))
}

/// Method-of-moments parameters: shape `mean² / variance`, mean `mean`.
pub fn moment_estimate(values: &[f64]) -> Result<GammaFit> {
    let m = moments(values)?;
    if !(m.variance > 0.0) {
        return Err(Error::InsufficientData("observations have zero variance".into()));
    }
    let shape = m.mean * m.mean / m.variance;
    Ok(GammaFit {
        n: 2.0 * shape,
        beta0: m.mean,
        n_days: m.count,
        log_likelihood: log_likelihood_from(&m, shape, m.mean),
    })
}

/// Maximum-likelihood gamma fit of daily β values.
pub fn fit_gamma(observations: &[DailyBeta]) -> Result<GammaFit> {
    let values: Vec<f64> = observations.iter().map(|o| o.beta).collect();
    fit_gamma_values(&values)
}

/// Maximum-likelihood gamma fit of raw positive values.
///
/// The mean parameter is the sample mean; the shape `k = n/2` solves
/// `ln k − ψ(k) = ln(mean) − mean(ln)` by Newton steps in `ln k`, falling
/// back to bisection whenever a step would leave the bracket `[1e-3, 1e3]`.
pub fn fit_gamma_values(values: &[f64]) -> Result<GammaFit> {
    if values.len() < MIN_FIT_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "gamma fit needs at least {MIN_FIT_OBSERVATIONS} observations, got {}",
            values.len()
        )));
    }
    let m = moments(values)?;
    let s = m.mean.ln() - m.mean_ln;
    if !(m.variance > 0.0) || !(s > 0.0) {
        return Err(Error::InsufficientData(
            "observations are all equal; the gamma shape is unbounded".into(),
        ));
    }
    let shape = solve_shape(s, m.mean * m.mean / m.variance)?;
    Ok(GammaFit {
        n: 2.0 * shape,
        beta0: m.mean,
        n_days: m.count,
        log_likelihood: log_likelihood_from(&m, shape, m.mean),
    })
}

/// Residual of the shape equation, `ln k − ψ(k) − s`. Decreasing in `k`.
pub fn shape_residual(shape: f64, s: f64) -> f64 {
    shape.ln() - digamma_unchecked(shape) - s
}

fn solve_shape(s: f64, initial: f64) -> Result<f64> {
    let (mut lo, mut hi) = (SHAPE_BRACKET.0.ln(), SHAPE_BRACKET.1.ln());
    let (r_lo, r_hi) = (shape_residual(lo.exp(), s), shape_residual(hi.exp(), s));
    if !(r_lo > 0.0 && r_hi < 0.0) {
        return Err(Error::NonConvergence {
            what: "gamma shape solve (root outside [1e-3, 1e3])",
            iterations: 0,
        });
    }
    let mut u = if initial.is_finite() && initial > 0.0 {
        initial.ln().clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..MAX_NEWTON_ITER {
        let k = u.exp();
        let r = shape_residual(k, s);
        if r.abs() <= 1e-14 {
            return Ok(k);
        }
        if r > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        // d r / d ln k = 1 − k ψ'(k)
        let slope = 1.0 - k * trigamma_unchecked(k);
        let step = r / slope;
        let next = u - step;
        u = if slope < 0.0 && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if step.abs() < 1e-15 || hi - lo < 1e-15 {
            break;
        }
    }
    let k = u.exp();
    if shape_residual(k, s).abs() <= RESIDUAL_TOL {
        Ok(k)
    } else {
        Err(Error::NonConvergence {
            what: "gamma shape Newton iteration",
            iterations: MAX_NEWTON_ITER,
        })
    }
}

fn check_beta(func: &'static str, beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(func, format!("beta must be finite and > 0, got {beta}")))
    }
}

/// Natural log of the gamma density at `beta`.
pub fn gamma_ln_pdf(beta: f64, fit: &GammaFit) -> Result<f64> {
    check_beta("gamma_pdf", beta)?;
    let shape = fit.shape();
    let rate = shape / fit.beta0;
    Ok(shape * rate.ln() - ln_gamma_unchecked(shape) + (shape - 1.0) * beta.ln() - rate * beta)
}

/// Gamma density at `beta`.
pub fn gamma_pdf(beta: f64, fit: &GammaFit) -> Result<f64> {
    Ok(gamma_ln_pdf(beta, fit)?.exp())
}

/// P(B > beta) under the fitted gamma law.
pub fn gamma_ccd(beta: f64, fit: &GammaFit) -> Result<f64> {
    check_beta("gamma_ccd", beta)?;
    reg_upper_inc_gamma(fit.shape(), fit.shape() * beta / fit.beta0)
}

/// Mode of the gamma density, `β₀ (n − 2) / n`, or 0 when `n <= 2`.
pub fn gamma_mode(fit: &GammaFit) -> f64 {
    (fit.beta0 * (fit.n - 2.0) / fit.n).max(0.0)
}
