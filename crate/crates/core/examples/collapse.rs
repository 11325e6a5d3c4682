//! Six synthetic stocks with different (n, β₀) collapse onto one master curve
//! at τ = 80.
//!
//! Run with: `cargo run --release --example collapse`

use volcollapse::estimation::{daily_beta, fit_gamma, DEFAULT_MIN_EVENTS};
use volcollapse::marketdata::extract_returns;
use volcollapse::simulate::{simulate_market, SimConfig};
use volcollapse::volmodel::{empirical_collapse, master_curve};

fn main() -> volcollapse::Result<()> {
    let stocks = [(2.5, 1e5), (3.0, 1e6), (3.5, 3e6), (4.0, 1e7), (4.5, 3e7), (5.0, 1e8)];
    let configs: Vec<SimConfig> = stocks
        .iter()
        .enumerate()
        .map(|(i, &(n, b))| SimConfig::new(format!("s{i}"), n, b, 1000, 1250, 500 + i as u64))
        .collect();
    let market = simulate_market(&configs)?;

    let mut curves = Vec::new();
    for stock in &market {
        let fit = fit_gamma(&daily_beta(&stock.series, DEFAULT_MIN_EVENTS)?.betas)?;
        let curve = empirical_collapse(&extract_returns(&stock.series, 80)?, &fit)?;
        let worst = (0..curve.abscissae.len())
            .filter(|&j| curve.counts[j] >= 100)
            .map(|j| (curve.f_values[j] / master_curve(curve.abscissae[j]) - 1.0).abs())
            .fold(0.0, f64::max);
        println!(
            "{}: fitted n = {:.3}, beta0 = {:.3e}, worst deviation {:.1}% over bins with >= 100 returns",
            stock.label,
            fit.n,
            fit.beta0,
            100.0 * worst
        );
        curves.push(curve);
    }

    // Side-by-side values at a few common bins of the first stock.
    let reference = &curves[0];
    println!("\n{:>8} {:>8} f(r') per stock", "r'", "master");
    for j in (0..reference.abscissae.len()).step_by(6) {
        let x = reference.abscissae[j];
        let values: Vec<String> = curves
            .iter()
            .map(|c| {
                let k = c.abscissae.partition_point(|&a| a < x).min(c.abscissae.len() - 1);
                format!("{:.4}", c.f_values[k])
            })
            .collect();
        println!("{x:>8.3} {:>8.4} {}", master_curve(x), values.join(" "));
    }
    Ok(())
}
