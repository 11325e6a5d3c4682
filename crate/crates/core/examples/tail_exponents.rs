//! Hill tail exponents of synthetic stocks against the model prediction.
//!
//! Run with: `cargo run --release --example tail_exponents`

use std::collections::BTreeMap;

use volcollapse::estimation::{daily_beta, fit_gamma, GammaFit, DEFAULT_MIN_EVENTS};
use volcollapse::marketdata::extract_returns;
use volcollapse::simulate::{simulate_stock, SimConfig};
use volcollapse::tails::{hill_estimate, predicted_tail_exponent, tail_report, DEFAULT_K_POINTS, TAIL_TAUS};

fn main() -> volcollapse::Result<()> {
    // Pareto quantiles with exponent 3: the estimator itself.
    let pareto: Vec<f64> = (1..=100_000)
        .map(|i| ((i as f64 - 0.5) / 1e5).powf(-1.0 / 3.0))
        .collect();
    println!("Hill on Pareto(3) quantiles: {:.4}", hill_estimate(&pareto, 0.05)?);

    // At 5% the model's exponent sits well below n and approaches it deeper in the tail.
    let fit = GammaFit::from_params(4.4, 1.0)?;
    for f in [0.05, 0.01, 1e-3, 1e-4] {
        println!(
            "predicted exponent for n = 4.4 at top {f}: {:.3}",
            predicted_tail_exponent(&fit, f, DEFAULT_K_POINTS)?
        );
    }

    println!(
        "\n{:>5} {:>8} {:>10} {:>10} {:>8}",
        "n", "fit n", "empirical", "predicted", "diff"
    );
    for (i, n) in [2.5, 3.0, 3.5, 4.0, 4.5, 5.0].into_iter().enumerate() {
        let config = SimConfig::new(format!("s{i}"), n, 1e6, 1000, 1250, 900 + i as u64);
        let series = simulate_stock(&config)?;
        let fit = fit_gamma(&daily_beta(&series, DEFAULT_MIN_EVENTS)?.betas)?;
        let by_tau = TAIL_TAUS
            .iter()
            .map(|&t| Ok((t, extract_returns(&series, t)?)))
            .collect::<volcollapse::Result<BTreeMap<_, _>>>()?;
        let report = tail_report(&config.label, &by_tau, &fit, 0.05, DEFAULT_K_POINTS)?;
        println!(
            "{n:>5} {:>8.3} {:>10.3} {:>10.3} {:>7.1}%",
            fit.n,
            report.empirical_exponent,
            report.predicted_exponent,
            100.0 * (report.empirical_exponent / report.predicted_exponent - 1.0)
        );
    }
    Ok(())
}
