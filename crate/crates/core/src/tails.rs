//! Hill estimates of the tail exponent, from data and from the model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::GammaFit;
use crate::marketdata::ReturnSeries;
use crate::volmodel::model_quantile;

/// Horizons whose Hill estimates are averaged.
pub const TAIL_TAUS: [usize; 6] = [10, 20, 40, 80, 160, 320];
/// Horizon left out of the average for lack of data.
pub const EXCLUDED_TAU: usize = 640;
pub const DEFAULT_TOP_FRACTION: f64 = 0.05;
pub const DEFAULT_K_POINTS: usize = 1000;
/// Fewest order statistics a Hill estimate may use.
pub const MIN_HILL_K: usize = 20;

fn check_fraction(top_fraction: f64) -> Result<()> {
    if top_fraction > 0.0 && top_fraction < 1.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "top fraction must lie in (0, 1), got {top_fraction}"
        )))
    }
}

/// Hill formula over the `k` largest values and the reference value
/// `threshold` (the (k+1)-th largest).
fn hill_from_order_stats(top: &[f64], threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::InsufficientData(format!(
            "Hill reference order statistic must be positive, got {threshold}"
        )));
    }
    let sum: f64 = top.iter().map(|&x| (x / threshold).ln()).sum();
    if !(sum > 0.0) {
        return Err(Error::InsufficientData(
            "top order statistics are all equal; Hill exponent undefined".into(),
        ));
    }
    Ok(top.len() as f64 / sum)
}

/// Hill estimate of the tail exponent of `|values|` using the top
/// `k = floor(top_fraction · N)` order statistics:
/// `α = [ (1/k) Σ ln(X₍ᵢ₎ / X₍ₖ₊₁₎) ]⁻¹`.
pub fn hill_estimate(values: &[f64], top_fraction: f64) -> Result<f64> {
    check_fraction(top_fraction)?;
    let k = (top_fraction * values.len() as f64).floor() as usize;
    if k < MIN_HILL_K {
        return Err(Error::InsufficientData(format!(
            "Hill estimate needs k >= {MIN_HILL_K} order statistics, got k = {k} from {} values",
            values.len()
        )));
    }
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    if abs.iter().any(|v| v.is_nan()) {
        return Err(Error::Invalid("Hill input contains NaN".into()));
    }
    // Partition so abs[..k] holds the k largest and abs[k] the next one.
    let (top, threshold, _) = abs.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    let threshold = *threshold;
    // Fixed summation order keeps the estimate independent of input order.
    top.sort_unstable_by(|a, b| b.total_cmp(a));
    hill_from_order_stats(top, threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTail {
    pub mean: f64,
    pub per_tau: BTreeMap<usize, f64>,
    /// Horizons present in the input but not used.
    pub ignored_taus: Vec<usize>,
}

/// Hill estimates at each of [`TAIL_TAUS`] and their arithmetic mean.
///
/// Every horizon in [`TAIL_TAUS`] must be present. Other horizons, including
/// [`EXCLUDED_TAU`], are ignored and listed in the result. A failure at any
/// horizon fails the whole estimate.
pub fn empirical_tail_exponent(
    series_by_tau: &BTreeMap<usize, ReturnSeries>,
    top_fraction: f64,
) -> Result<EmpiricalTail> {
    check_fraction(top_fraction)?;
    let missing: Vec<usize> = TAIL_TAUS
        .iter()
        .copied()
        .filter(|t| !series_by_tau.contains_key(t))
        .collect();
    if !missing.is_empty() {
        return Err(Error::InsufficientData(format!(
            "missing return series for tau {missing:?}"
        )));
    }
    let ignored_taus = series_by_tau
        .keys()
        .copied()
        .filter(|t| !TAIL_TAUS.contains(t))
        .collect();
    let mut per_tau = BTreeMap::new();
    for tau in TAIL_TAUS {
        let alpha = hill_estimate(&series_by_tau[&tau].returns, top_fraction).map_err(|e| match e {
            Error::InsufficientData(msg) => Error::InsufficientData(format!("tau={tau}: {msg}")),
            Error::Invalid(msg) => Error::Invalid(format!("tau={tau}: {msg}")),
            other => other,
        })?;
        per_tau.insert(tau, alpha);
    }
    let mean = per_tau.values().sum::<f64>() / per_tau.len() as f64;
    Ok(EmpiricalTail {
        mean,
        per_tau,
        ignored_taus,
    })
}

/// Hill formula applied to exact model quantiles of the top `top_fraction`.
///
/// The `k_points` mid-probability quantiles at
/// `p_i = top_fraction · (i − 1/2) / k_points` stand in for the top order
/// statistics and the quantile at `top_fraction` for the reference one. The
/// result depends on `n` only.
pub fn predicted_tail_exponent(fit: &GammaFit, top_fraction: f64, k_points: usize) -> Result<f64> {
    check_fraction(top_fraction)?;
    if k_points < 100 {
        return Err(Error::Invalid(format!("k_points must be >= 100, got {k_points}")));
    }
    let top = (1..=k_points)
        .map(|i| model_quantile(top_fraction * (i as f64 - 0.5) / k_points as f64, fit.n))
        .collect::<Result<Vec<_>>>()?;
    let threshold = model_quantile(top_fraction, fit.n)?;
    hill_from_order_stats(&top, threshold)
}

/// One stock's empirical against predicted tail exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub stock_id: String,
    pub empirical_exponent: f64,
    pub per_tau_exponents: BTreeMap<usize, f64>,
    pub predicted_exponent: f64,
    pub top_fraction: f64,
}

pub fn tail_report(
    stock_id: &str,
    series_by_tau: &BTreeMap<usize, ReturnSeries>,
    fit: &GammaFit,
    top_fraction: f64,
    k_points: usize,
) -> Result<TailReport> {
    let empirical = empirical_tail_exponent(series_by_tau, top_fraction)?;
    let predicted = predicted_tail_exponent(fit, top_fraction, k_points)?;
    Ok(TailReport {
        stock_id: stock_id.to_string(),
        empirical_exponent: empirical.mean,
        per_tau_exponents: empirical.per_tau,
        predicted_exponent: predicted,
        top_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto_quantiles(alpha: f64, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|i| ((i as f64 - 0.5) / n as f64).powf(-1.0 / alpha))
            .collect()
    }

    fn series(tau: usize, returns: Vec<f64>) -> ReturnSeries {
        let source_day = vec![0; returns.len()];
        ReturnSeries {
            tau,
            returns,
            source_day,
        }
    }

    #[test]
    fn pareto_quantiles_recover_exponent() {
        let a = hill_estimate(&pareto_quantiles(3.0, 10_000), 0.05).unwrap();
        assert!((a / 3.0 - 1.0).abs() < 0.02, "{a}");
        let a = hill_estimate(&pareto_quantiles(3.0, 100_000), 0.05).unwrap();
        assert!((a / 3.0 - 1.0).abs() <= 0.005, "{a}");
    }

    #[test]
    fn sign_and_order_do_not_matter() {
        let mut v = pareto_quantiles(2.0, 2_000);
        let a = hill_estimate(&v, 0.05).unwrap();
        v.reverse();
        for (i, x) in v.iter_mut().enumerate() {
            if i % 3 == 0 {
                *x = -*x;
            }
        }
        assert_eq!(hill_estimate(&v, 0.05).unwrap(), a);
    }

    #[test]
    fn power_of_two_rescaling_is_exact() {
        let v = pareto_quantiles(3.5, 5_000);
        let scaled: Vec<f64> = v.iter().map(|x| x * 0.125).collect();
        assert_eq!(hill_estimate(&v, 0.05).unwrap(), hill_estimate(&scaled, 0.05).unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            hill_estimate(&vec![2.0; 1000], 0.05),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            hill_estimate(&[1.0; 100], 0.05),
            Err(Error::InsufficientData(_))
        ));
        let mut zeros = vec![0.0; 1000];
        zeros[0] = 1.0;
        assert!(hill_estimate(&zeros, 0.05).is_err());
        assert!(hill_estimate(&[1.0; 1000], 0.0).is_err());
    }

    #[test]
    fn identical_series_average_to_common_value() {
        let v = pareto_quantiles(3.0, 4_000);
        let map: BTreeMap<_, _> = TAIL_TAUS.iter().map(|&t| (t, series(t, v.clone()))).collect();
        let tail = empirical_tail_exponent(&map, 0.05).unwrap();
        let single = hill_estimate(&v, 0.05).unwrap();
        assert!((tail.mean - single).abs() < 1e-12);
        assert!(tail.ignored_taus.is_empty());
    }

    #[test]
    fn tau_640_is_ignored_and_missing_tau_fails() {
        let v = pareto_quantiles(3.0, 4_000);
        let mut map: BTreeMap<_, _> = TAIL_TAUS.iter().map(|&t| (t, series(t, v.clone()))).collect();
        map.insert(640, series(640, vec![1.0; 3]));
        let tail = empirical_tail_exponent(&map, 0.05).unwrap();
        assert_eq!(tail.ignored_taus, vec![640]);
        assert_eq!(tail.per_tau.len(), 6);
        map.remove(&40);
        assert!(matches!(
            empirical_tail_exponent(&map, 0.05),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn failing_tau_is_named() {
        let v = pareto_quantiles(3.0, 4_000);
        let mut map: BTreeMap<_, _> = TAIL_TAUS.iter().map(|&t| (t, series(t, v.clone()))).collect();
        map.insert(320, series(320, v[..100].to_vec()));
        let msg = empirical_tail_exponent(&map, 0.05).unwrap_err().to_string();
        assert!(msg.contains("tau=320"), "{msg}");
    }

    #[test]
    fn predicted_exponent_limits() {
        let fit = GammaFit::from_params(4.40, 1.28e7).unwrap();
        let deep = predicted_tail_exponent(&fit, 1e-4, 1000).unwrap();
        assert!((deep / 4.40 - 1.0).abs() < 0.02, "{deep}");
        let other = GammaFit::from_params(4.40, 3.0).unwrap();
        assert_eq!(
            predicted_tail_exponent(&fit, 0.05, 500).unwrap(),
            predicted_tail_exponent(&other, 0.05, 500).unwrap()
        );
        assert!(predicted_tail_exponent(&fit, 0.05, 99).is_err());
    }

    #[test]
    fn predicted_exponent_tends_to_n_monotonically() {
        let fit = GammaFit::from_params(3.0, 1.0).unwrap();
        let values: Vec<f64> = [0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4]
            .iter()
            .map(|&f| predicted_tail_exponent(&fit, f, 400).unwrap())
            .collect();
        let gaps: Vec<f64> = values.iter().map(|a| (a - 3.0).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }
}
