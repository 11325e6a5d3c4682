//! Simulate two stocks, write their quote files and truth records, and read
//! the quotes back through the ingestion path.
//!
//! Run with: `cargo run --example simulate_market`

use std::fs::File;

use volcollapse::io::write_json;
use volcollapse::marketdata::{build_midprice_series, read_quotes_file, DayCalendar, QuoteFormat};
use volcollapse::simulate::{simulate_market, write_quotes, SimConfig, SimTruth};

fn main() -> volcollapse::Result<()> {
    let dir = std::env::temp_dir().join("volcollapse-simulate-example");
    std::fs::create_dir_all(&dir).map_err(|e| volcollapse::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let configs = vec![
        SimConfig::new("calm", 5.0, 4e7, 40, 500, 1),
        SimConfig::new("wild", 2.5, 2e6, 40, 500, 2),
    ];
    for stock in simulate_market(&configs)? {
        let config = configs.iter().find(|c| c.label == stock.label).expect("same labels");
        let quotes = dir.join(format!("{}_quotes.csv", config.label));
        let file = File::create(&quotes).map_err(|e| volcollapse::Error::Io {
            path: quotes.clone(),
            source: e,
        })?;
        write_quotes(config, &stock.series, std::io::BufWriter::new(file))?;
        let truth = SimTruth::from_config(config)?;
        write_json(&dir.join(format!("{}_truth.json", config.label)), &truth)?;

        let parsed = read_quotes_file(&quotes, QuoteFormat::Mid)?;
        let back = build_midprice_series(&parsed.ticks, &DayCalendar::utc())?;
        let lo = truth.day_betas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = truth.day_betas.iter().copied().fold(0.0, f64::max);
        println!(
            "{}: {} events, {} days, round trip {}, daily beta from {lo:.3e} to {hi:.3e}",
            config.label,
            back.len(),
            back.n_days(),
            if back == stock.series { "exact" } else { "differs" },
        );
    }
    println!("files in {}", dir.display());
    Ok(())
}
