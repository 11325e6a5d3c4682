//! The Student-t return law: check it against direct integration of the
//! Gaussian-gamma mixture, then tabulate its CCD, quantiles and collapse.
//!
//! Run with: `cargo run --release --example model_curves`

use volcollapse::estimation::{gamma_pdf, GammaFit};
use volcollapse::specfun::integrate_scaled;
use volcollapse::volmodel::{
    collapse_lambda, collapse_transform, conditional_pdf, master_curve, model_ccd, model_pdf, model_quantile,
    scaled_pdf, ModelParams,
};

fn main() -> volcollapse::Result<()> {
    let (n, beta0, tau) = (4.40, 1.28e7, 10);
    let params = ModelParams::new(n, beta0, tau)?;
    let fit = GammaFit::from_params(n, beta0)?;
    let width = (n * tau as f64 / (2.0 * beta0)).sqrt();

    println!("mixture integral against the closed form (n={n}, beta0={beta0:e}, tau={tau})");
    println!(
        "{:>12} {:>16} {:>16} {:>10}",
        "r", "closed form", "quadrature", "abs diff"
    );
    for i in [0, 1, 2, 4, 6] {
        let r = i as f64 * width;
        let mix = integrate_scaled(
            |b| conditional_pdf(r, tau, b) * gamma_pdf(b, &fit).unwrap_or(0.0),
            0.0,
            f64::INFINITY,
            beta0,
            1e-12,
        )?;
        let exact = model_pdf(r, &params);
        println!(
            "{r:>12.3e} {exact:>16.8} {:>16.8} {:>10.1e}",
            mix.value,
            (exact - mix.value).abs()
        );
    }

    println!("\nCCD of |r'| and its log-log slope");
    println!("{:>8} {:>12} {:>8}", "r'", "P(|r'|>x)", "slope");
    for x in [0.5f64, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0] {
        let c = model_ccd(x, n)?;
        let slope = (model_ccd(x * 1.01, n)?.ln() - c.ln()) / 1.01f64.ln();
        println!("{x:>8} {c:>12.4e} {slope:>8.3}");
    }

    println!("\nquantiles of |r'|");
    for p in [0.1, 0.05, 0.01, 1e-3] {
        println!("  P(|r'| > q) = {p:<6} at q = {:.4}", model_quantile(p, n)?);
    }

    println!("\ncollapse: [Lambda P]^(2/(n+1)) is the same curve for every n");
    print!("{:>6}", "r'");
    for m in [2.5, 4.4, 8.0] {
        print!(" {:>10}", format!("n={m}"));
    }
    println!(" {:>10}", "master");
    for x in [0.0, 0.5, 1.0, 2.0, 5.0] {
        print!("{x:>6}");
        for m in [2.5, 4.4, 8.0] {
            print!(" {:>10.6}", collapse_transform(scaled_pdf(x, m), m)?);
        }
        println!(" {:>10.6}", master_curve(x));
    }
    println!("Lambda(n=4.4) = {:.6}", collapse_lambda(n));
    Ok(())
}
