//! Parse bid/ask quotes, build the event-clock mid-price series and cut it
//! into returns at a few horizons.
//!
//! Run with: `cargo run --example ingest_quotes`

use std::io::Cursor;

use volcollapse::marketdata::{build_midprice_series, extract_returns, parse_quotes, DayCalendar, QuoteFormat};

const NS: i64 = 1_000_000_000;

fn main() -> volcollapse::Result<()> {
    // Two trading days, 2001-01-02 and 2001-01-03, with a repeated mid (not
    // an event) and one garbled line.
    let day0 = 978_393_600 * NS + 34_200 * NS;
    let day1 = day0 + 86_400 * NS;
    let mut text = String::from("timestamp,bid,ask\n");
    let mids = [100.00, 100.02, 100.02, 100.05, 99.98, 100.01, 100.04, 100.00];
    for (i, m) in mids.iter().enumerate() {
        text += &format!("{},{:.3},{:.3}\n", day0 + i as i64 * NS, m - 0.005, m + 0.005);
    }
    text += "not,a,quote\n";
    for (i, m) in mids.iter().rev().enumerate() {
        text += &format!("{},{:.3},{:.3}\n", day1 + i as i64 * NS, m - 0.005, m + 0.005);
    }
    // 1 bad line in 17 is over the 1% limit; a real file would be rejected.
    let parsed = match parse_quotes(Cursor::new(text.as_bytes()), QuoteFormat::BidAsk) {
        Ok(p) => p,
        Err(e) => {
            println!("rejected as expected: {e}");
            let clean: String = text
                .lines()
                .filter(|l| !l.starts_with("not"))
                .map(|l| format!("{l}\n"))
                .collect();
            parse_quotes(Cursor::new(clean.as_bytes()), QuoteFormat::BidAsk)?
        }
    };
    println!("{} quotes from {} data lines", parsed.ticks.len(), parsed.data_lines);

    let series = build_midprice_series(&parsed.ticks, &DayCalendar::utc())?;
    println!("{} events over {} days", series.len(), series.n_days());
    for (day, prices) in series.day_slices() {
        println!("  {day}: {prices:?}");
    }
    for tau in [1, 2, 3] {
        let r = extract_returns(&series, tau)?;
        let shown: Vec<String> = r.returns.iter().map(|x| format!("{x:+.5}")).collect();
        println!("tau={tau}: {} returns [{}]", r.len(), shown.join(", "));
    }
    Ok(())
}
