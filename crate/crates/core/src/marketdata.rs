//! Quote ingestion, the event-clock mid-price series and non-overlapping
//! log-returns.
//!
//! The event clock advances by one unit each time the mid-price changes, so
//! a [`MidPriceSeries`] never holds two equal consecutive prices. Returns are
//! formed within a trading day only; the trailing events of a day that do not
//! fill a whole window of length `tau` are dropped.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, NaiveDate};
use flate2::read::GzDecoder;

use crate::error::{Error, Result};

/// Fraction of malformed lines above which parsing fails outright.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

const NANOS_PER_SECOND: i64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuoteTick {
    /// Nanoseconds since the Unix epoch.
    pub timestamp: i64,
    pub bid: f64,
    pub ask: f64,
}

impl QuoteTick {
    pub fn new(timestamp: i64, bid: f64, ask: f64) -> Result<Self> {
        if !(bid.is_finite() && bid > 0.0) || !(ask.is_finite() && ask > 0.0) {
            return Err(Error::Invalid(format!("non-positive quote: bid={bid}, ask={ask}")));
        }
        if ask < bid {
            return Err(Error::Invalid(format!("crossed quote: ask {ask} < bid {bid}")));
        }
        Ok(Self { timestamp, bid, ask })
    }

    /// A tick carrying only a mid-price.
    pub fn from_mid(timestamp: i64, mid: f64) -> Result<Self> {
        Self::new(timestamp, mid, mid)
    }

    pub fn mid(&self) -> f64 {
        if self.bid == self.ask {
            self.bid
        } else {
            0.5 * (self.bid + self.ask)
        }
    }
}

/// Column layout of a quote file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuoteFormat {
    /// `timestamp,bid,ask`
    #[default]
    BidAsk,
    /// `timestamp,mid`
    Mid,
}

impl QuoteFormat {
    fn columns(self) -> &'static [&'static str] {
        match self {
            QuoteFormat::BidAsk => &["timestamp", "bid", "ask"],
            QuoteFormat::Mid => &["timestamp", "mid"],
        }
    }
}

impl std::str::FromStr for QuoteFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bid-ask" | "bidask" | "quotes" => Ok(QuoteFormat::BidAsk),
            "mid" => Ok(QuoteFormat::Mid),
            other => Err(Error::Invalid(format!("unknown quote format {other:?}"))),
        }
    }
}

impl std::fmt::Display for QuoteFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QuoteFormat::BidAsk => "bid-ask",
            QuoteFormat::Mid => "mid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MalformedLine {
    pub line: usize,
    pub reason: String,
}

/// Result of [`parse_quotes`]: the accepted ticks plus the rejected lines.
#[derive(Debug, Clone, Default)]
pub struct ParsedQuotes {
    pub ticks: Vec<QuoteTick>,
    pub data_lines: usize,
    pub malformed: Vec<MalformedLine>,
}

/// Parses line-delimited quote records.
///
/// A header line naming the columns is optional; if present, columns are
/// located by name, otherwise the order of `format` is assumed. Lines that
/// fail to parse, violate the quote invariants, or move the timestamp
/// backwards are recorded as malformed. More than 1% malformed lines is a
/// [`Error::DataQuality`] error.
pub fn parse_quotes<R: BufRead>(reader: R, format: QuoteFormat) -> Result<ParsedQuotes> {
    let mut out = ParsedQuotes::default();
    let wanted = format.columns();
    let mut positions: Vec<usize> = (0..wanted.len()).collect();
    let mut first = true;
    let mut last_ts = i64::MIN;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<quote stream>", e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if first {
            first = false;
            if fields.first().is_some_and(|f| f.parse::<i64>().is_err()) {
                positions = locate_columns(&fields, wanted)?;
                continue;
            }
        }
        out.data_lines += 1;
        match parse_record(&fields, &positions, format) {
            Ok(tick) if tick.timestamp < last_ts => out.malformed.push(MalformedLine {
                line: line_no,
                reason: format!("timestamp {} precedes {}", tick.timestamp, last_ts),
            }),
            Ok(tick) => {
                last_ts = tick.timestamp;
                out.ticks.push(tick);
            }
            Err(reason) => out.malformed.push(MalformedLine { line: line_no, reason }),
        }
    }

    if out.data_lines > 0 && out.malformed.len() as f64 > MAX_MALFORMED_FRACTION * out.data_lines as f64 {
        let first = &out.malformed[0];
        return Err(Error::DataQuality {
            malformed: out.malformed.len(),
            total: out.data_lines,
            first_line: first.line,
            first_reason: first.reason.clone(),
        });
    }
    Ok(out)
}

fn locate_columns(header: &[&str], wanted: &[&str]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::DataQuality {
                    malformed: 1,
                    total: 1,
                    first_line: 1,
                    first_reason: format!("header {header:?} lacks column {name:?}"),
                })
        })
        .collect()
}

fn parse_record(fields: &[&str], positions: &[usize], format: QuoteFormat) -> std::result::Result<QuoteTick, String> {
    let get = |i: usize| -> std::result::Result<&str, String> {
        fields
            .get(positions[i])
            .copied()
            .ok_or_else(|| format!("expected at least {} fields, got {}", positions[i] + 1, fields.len()))
    };
    let num = |i: usize| -> std::result::Result<f64, String> {
        let s = get(i)?;
        s.parse::<f64>().map_err(|_| format!("not a number: {s:?}"))
    };
    let ts_str = get(0)?;
    let timestamp = ts_str.parse::<i64>().map_err(|_| format!("bad timestamp {ts_str:?}"))?;
    let tick = match format {
        QuoteFormat::BidAsk => QuoteTick::new(timestamp, num(1)?, num(2)?),
        QuoteFormat::Mid => QuoteTick::from_mid(timestamp, num(1)?),
    };
    tick.map_err(|e| e.to_string())
}

/// Opens a quote file, transparently decompressing `.gz` files.
pub fn read_quotes_file(path: &Path, format: QuoteFormat) -> Result<ParsedQuotes> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_quotes(BufReader::new(reader), format).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Maps timestamps to trading days.
#[derive(Debug, Clone, Default)]
pub struct DayCalendar {
    /// Offset of the exchange's local time from UTC, in seconds.
    pub utc_offset_seconds: i64,
    /// If set, ticks on other dates are excluded.
    pub sessions: Option<BTreeSet<NaiveDate>>,
}

impl DayCalendar {
    pub fn utc() -> Self {
        Self::default()
    }

    pub fn day_of(&self, timestamp_ns: i64) -> NaiveDate {
        let secs = timestamp_ns.div_euclid(NANOS_PER_SECOND) + self.utc_offset_seconds;
        DateTime::from_timestamp(secs, 0)
            .expect("i64 nanoseconds always fit in chrono's range")
            .date_naive()
    }

    fn admits(&self, day: NaiveDate) -> bool {
        self.sessions.as_ref().is_none_or(|s| s.contains(&day))
    }
}

/// Event-clock mid-price path split into trading days.
#[derive(Debug, Clone, PartialEq)]
pub struct MidPriceSeries {
    prices: Vec<f64>,
    day_boundaries: Vec<usize>,
    days: Vec<NaiveDate>,
}

impl MidPriceSeries {
    /// `day_boundaries[i]` is the index of the first event of `days[i]`.
    pub fn new(prices: Vec<f64>, day_boundaries: Vec<usize>, days: Vec<NaiveDate>) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::InsufficientData("mid-price series has no events".into()));
        }
        if let Some(p) = prices.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Invalid(format!("mid-price {p} is not positive")));
        }
        if let Some(w) = prices.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::Invalid(format!(
                "events {w} and {} carry the same mid-price",
                w + 1
            )));
        }
        if day_boundaries.first() != Some(&0) {
            return Err(Error::Invalid("first day boundary must be 0".into()));
        }
        if day_boundaries.windows(2).any(|w| w[0] >= w[1]) || day_boundaries.last().is_some_and(|&b| b >= prices.len())
        {
            return Err(Error::Invalid(
                "day boundaries must be strictly increasing and in range".into(),
            ));
        }
        if days.len() != day_boundaries.len() {
            return Err(Error::Invalid(format!(
                "{} day labels for {} day boundaries",
                days.len(),
                day_boundaries.len()
            )));
        }
        Ok(Self {
            prices,
            day_boundaries,
            days,
        })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn day_boundaries(&self) -> &[usize] {
        &self.day_boundaries
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    /// Price slice of each trading day, in order.
    pub fn day_slices(&self) -> impl Iterator<Item = (NaiveDate, &[f64])> + '_ {
        let ends = self
            .day_boundaries
            .iter()
            .skip(1)
            .copied()
            .chain(std::iter::once(self.prices.len()));
        self.day_boundaries
            .iter()
            .zip(ends)
            .zip(&self.days)
            .map(|((&start, end), &day)| (day, &self.prices[start..end]))
    }

    /// Returns a copy with every price multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.prices.iter().map(|p| p * factor).collect(),
            self.day_boundaries.clone(),
            self.days.clone(),
        )
    }
}

/// Reduces timestamp-ordered ticks to the event-clock mid-price series.
///
/// A tick whose mid equals the previous retained mid does not advance the
/// clock. Each retained event is assigned to the calendar day of its tick.
pub fn build_midprice_series(ticks: &[QuoteTick], calendar: &DayCalendar) -> Result<MidPriceSeries> {
    let mut prices = Vec::new();
    let mut day_boundaries = Vec::new();
    let mut days: Vec<NaiveDate> = Vec::new();
    let mut last_ts = i64::MIN;
    for tick in ticks {
        if tick.timestamp < last_ts {
            return Err(Error::Invalid(format!(
                "ticks out of order: {} after {}",
                tick.timestamp, last_ts
            )));
        }
        last_ts = tick.timestamp;
        let day = calendar.day_of(tick.timestamp);
        if !calendar.admits(day) {
            continue;
        }
        let mid = tick.mid();
        if prices.last() == Some(&mid) {
            continue;
        }
        if days.last() != Some(&day) {
            day_boundaries.push(prices.len());
            days.push(day);
        }
        prices.push(mid);
    }
    if prices.is_empty() {
        return Err(Error::InsufficientData("no mid-price events retained".into()));
    }
    MidPriceSeries::new(prices, day_boundaries, days)
}

/// Non-overlapping log-returns at horizon `tau` (in events).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub tau: usize,
    pub returns: Vec<f64>,
    /// Index into the source series' days for each return.
    pub source_day: Vec<usize>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Extracts `ln p[k·tau + tau] - ln p[k·tau]` for each whole window inside
/// each day. Windows never cross a day boundary.
pub fn extract_returns(series: &MidPriceSeries, tau: usize) -> Result<ReturnSeries> {
    if tau == 0 {
        return Err(Error::Invalid("tau must be >= 1".into()));
    }
    let mut returns = Vec::new();
    let mut source_day = Vec::new();
    for (day_idx, (_, prices)) in series.day_slices().enumerate() {
        for start in (0..prices.len()).step_by(tau) {
            let Some(&end_price) = prices.get(start + tau) else {
                break;
            };
            returns.push((end_price / prices[start]).ln());
            source_day.push(day_idx);
        }
    }
    Ok(ReturnSeries {
        tau,
        returns,
        source_day,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const DAY0: i64 = 1_004_659_200_000_000_000; // 2001-11-02T00:00:00Z
    const NS_DAY: i64 = 86_400 * NANOS_PER_SECOND;

    fn one_day(prices: &[f64]) -> MidPriceSeries {
        let day = NaiveDate::from_ymd_opt(2001, 1, 2).unwrap();
        MidPriceSeries::new(prices.to_vec(), vec![0], vec![day]).unwrap()
    }

    #[test]
    fn parses_headerless_line() {
        let parsed = parse_quotes(Cursor::new("1004659200000000000,10.00,10.02\n"), QuoteFormat::BidAsk).unwrap();
        assert_eq!(parsed.ticks, vec![QuoteTick::new(DAY0, 10.00, 10.02).unwrap()]);
        assert!(parsed.malformed.is_empty());
    }

    #[test]
    fn header_columns_are_located_by_name() {
        let text = "ask,timestamp,bid\n10.02,1004659200000000000,10.00\n";
        let parsed = parse_quotes(Cursor::new(text), QuoteFormat::BidAsk).unwrap();
        assert_eq!(parsed.ticks[0].bid, 10.00);
        assert_eq!(parsed.ticks[0].ask, 10.02);
    }

    #[test]
    fn crossed_quote_is_counted_malformed() {
        let mut text = String::from("timestamp,bid,ask\n");
        for i in 0..200 {
            text.push_str(&format!("{},10.00,10.02\n", DAY0 + i));
        }
        text.push_str(&format!("{},10.05,10.01\n", DAY0 + 500));
        let parsed = parse_quotes(Cursor::new(text), QuoteFormat::BidAsk).unwrap();
        assert_eq!(parsed.ticks.len(), 200);
        assert_eq!(parsed.malformed.len(), 1);
        assert_eq!(parsed.malformed[0].line, 202);
    }

    #[test]
    fn too_many_malformed_lines_is_fatal() {
        let text = format!("timestamp,bid,ask\n{DAY0},10,10.1\n{DAY0},x,10.1\n");
        let err = parse_quotes(Cursor::new(text), QuoteFormat::BidAsk).unwrap_err();
        assert!(
            matches!(
                err,
                Error::DataQuality {
                    malformed: 1,
                    total: 2,
                    ..
                }
            ),
            "{err}"
        );
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn empty_stream() {
        let parsed = parse_quotes(Cursor::new(""), QuoteFormat::BidAsk).unwrap();
        assert!(parsed.ticks.is_empty());
        assert!(parsed.malformed.is_empty());
    }

    #[test]
    fn mid_format() {
        let parsed = parse_quotes(Cursor::new("timestamp,mid\n5,101.5\n6,101.25\n"), QuoteFormat::Mid).unwrap();
        assert_eq!(
            parsed.ticks.iter().map(QuoteTick::mid).collect::<Vec<_>>(),
            vec![101.5, 101.25]
        );
    }

    #[test]
    fn backwards_timestamp_is_malformed() {
        let mut text = String::new();
        for i in 0..150 {
            text.push_str(&format!("{},1.0\n", 100 + i));
        }
        text.push_str("50,1.0\n");
        let parsed = parse_quotes(Cursor::new(text), QuoteFormat::Mid).unwrap();
        assert_eq!(parsed.malformed.len(), 1);
        assert!(parsed.ticks.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn equal_mids_collapse() {
        let ticks: Vec<_> = [10.0, 10.0, 10.5, 10.5, 10.0]
            .iter()
            .enumerate()
            .map(|(i, &m)| QuoteTick::from_mid(DAY0 + i as i64, m).unwrap())
            .collect();
        let s = build_midprice_series(&ticks, &DayCalendar::utc()).unwrap();
        assert_eq!(s.prices(), &[10.0, 10.5, 10.0]);
        assert_eq!(s.day_boundaries(), &[0]);
    }

    #[test]
    fn mid_from_bid_ask() {
        let ticks = [
            QuoteTick::new(DAY0, 9.99, 10.01).unwrap(),
            QuoteTick::new(DAY0 + 1, 9.98, 10.02).unwrap(),
            QuoteTick::new(DAY0 + 2, 10.00, 10.04).unwrap(),
        ];
        let s = build_midprice_series(&ticks, &DayCalendar::utc()).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn single_tick_and_two_days() {
        let s = build_midprice_series(&[QuoteTick::from_mid(DAY0, 5.0).unwrap()], &DayCalendar::utc()).unwrap();
        assert_eq!((s.len(), s.day_boundaries().len()), (1, 1));

        let ticks = [
            QuoteTick::from_mid(DAY0, 5.0).unwrap(),
            QuoteTick::from_mid(DAY0 + 10, 5.1).unwrap(),
            QuoteTick::from_mid(DAY0 + NS_DAY, 5.2).unwrap(),
        ];
        let s = build_midprice_series(&ticks, &DayCalendar::utc()).unwrap();
        assert_eq!(s.day_boundaries(), &[0, 2]);
        assert_eq!(
            s.days(),
            &[
                NaiveDate::from_ymd_opt(2001, 11, 2).unwrap(),
                NaiveDate::from_ymd_opt(2001, 11, 3).unwrap()
            ]
        );
    }

    #[test]
    fn calendar_filters_sessions() {
        let keep = NaiveDate::from_ymd_opt(2001, 11, 3).unwrap();
        let cal = DayCalendar {
            sessions: Some([keep].into_iter().collect()),
            ..DayCalendar::default()
        };
        let ticks = [
            QuoteTick::from_mid(DAY0, 5.0).unwrap(),
            QuoteTick::from_mid(DAY0 + NS_DAY, 5.2).unwrap(),
        ];
        let s = build_midprice_series(&ticks, &cal).unwrap();
        assert_eq!(s.days(), &[keep]);
        assert!(build_midprice_series(&ticks[..1], &cal).is_err());
    }

    #[test]
    fn no_ticks_is_an_error() {
        let err = build_midprice_series(&[], &DayCalendar::utc()).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn return_definition() {
        let r = extract_returns(&one_day(&[100.0, 101.0]), 1).unwrap();
        assert!((r.returns[0] - 0.009_950_330_853_168_083).abs() < 1e-15);
        let r = extract_returns(&one_day(&[100.0, std::f64::consts::E * 100.0]), 1).unwrap();
        assert!((r.returns[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn windows_do_not_overlap_and_remainder_is_dropped() {
        let s = one_day(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let r = extract_returns(&s, 2).unwrap();
        assert_eq!(r.returns.len(), 2);
        assert!((r.returns[0] - 3f64.ln()).abs() < 1e-15);
        assert!((r.returns[1] - (5.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!(extract_returns(&s, 5).unwrap().is_empty());
        assert!(extract_returns(&s, 0).is_err());
    }

    #[test]
    fn windows_never_cross_days() {
        let d = |i| NaiveDate::from_ymd_opt(2001, 1, i).unwrap();
        let s = MidPriceSeries::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0, 3], vec![d(2), d(3)]).unwrap();
        let r = extract_returns(&s, 1).unwrap();
        assert_eq!(r.source_day, vec![0, 0, 1]);
        assert!((r.returns[2] - (5.0f64 / 4.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn series_invariants_are_enforced() {
        let d = NaiveDate::from_ymd_opt(2001, 1, 2).unwrap();
        assert!(MidPriceSeries::new(vec![1.0, 1.0], vec![0], vec![d]).is_err());
        assert!(MidPriceSeries::new(vec![1.0, 2.0], vec![1], vec![d]).is_err());
        assert!(MidPriceSeries::new(vec![1.0, -2.0], vec![0], vec![d]).is_err());
    }
}
