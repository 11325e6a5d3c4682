//! Recover (n, β₀) from simulated daily β values, from the raw gamma draws
//! and from β measured on simulated prices.
//!
//! Run with: `cargo run --release --example fit_gamma`

use volcollapse::estimation::{
    daily_beta, fit_gamma, fit_gamma_values, gamma_ccd, moment_estimate, DEFAULT_MIN_EVENTS,
};
use volcollapse::simulate::{draw_beta_days, simulate_stock, SimConfig};
use volcollapse::volmodel::{empirical_ccd, CcdGrid};

fn main() -> volcollapse::Result<()> {
    let (n, beta0) = (4.40, 1.28e7);

    println!(
        "{:>8} {:>10} {:>14} {:>10} {:>14}",
        "days", "n (MLE)", "beta0 (MLE)", "n (mom)", "log-lik"
    );
    for days in [100, 500, 5_000, 100_000] {
        let draws = draw_beta_days(&SimConfig::new("draws", n, beta0, days, 2, 11))?;
        let mle = fit_gamma_values(&draws)?;
        let mom = moment_estimate(&draws)?;
        println!(
            "{days:>8} {:>10.4} {:>14.5e} {:>10.4} {:>14.2}",
            mle.n, mle.beta0, mom.n, mle.log_likelihood
        );
    }

    // β measured once per day from 1000 events adds a little noise to each value.
    let config = SimConfig::new("prices", n, beta0, 500, 1000, 11);
    let series = simulate_stock(&config)?;
    let report = daily_beta(&series, DEFAULT_MIN_EVENTS)?;
    let fit = fit_gamma(&report.betas)?;
    println!(
        "\nfrom prices: n = {:.4}, beta0 = {:.5e} over {} days",
        fit.n, fit.beta0, fit.n_days
    );

    let betas: Vec<f64> = report.betas.iter().map(|b| b.beta).collect();
    let curve = empirical_ccd(&betas, &CcdGrid::LogSpaced { points: 12 }, false)?;
    println!("\n{:>12} {:>9} {:>9} {:>9}", "beta", "ccd", "stderr", "gamma");
    for i in 0..curve.abscissae.len() {
        let x = curve.abscissae[i];
        println!(
            "{x:>12.4e} {:>9.4} {:>9.4} {:>9.4}",
            curve.ccd_values[i],
            curve.stderr[i],
            gamma_ccd(x, &fit)?
        );
    }
    Ok(())
}
