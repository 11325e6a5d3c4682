//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimation::{daily_beta, fit_gamma, gamma_ccd, GammaFit, DEFAULT_MIN_EVENTS};
use crate::io::{
    read_json, read_series, write_atomic, write_curve, write_json, write_series, write_table, BetaCcdRow, CurveMeta,
    CurveRow, RunManifest, ScatterRow, TableFormat,
};
use crate::marketdata::{
    build_midprice_series, extract_returns, read_quotes_file, DayCalendar, MidPriceSeries, QuoteFormat,
};
use crate::simulate::{simulate_market, write_quotes, SimConfig, SimTruth};
use crate::tails::{tail_report, DEFAULT_K_POINTS, DEFAULT_TOP_FRACTION, TAIL_TAUS};
use crate::volmodel::{
    empirical_ccd, empirical_collapse, log_space, master_curve, scale_return, theoretical_ccd, CcdCurve, CcdGrid,
    CollapseCurve, ModelParams, COLLAPSE_MIN_ABS, DEFAULT_CCD_POINTS,
};

const DEFAULT_CCD_TAUS: [usize; 7] = [10, 20, 40, 80, 160, 320, 640];
const DEFAULT_COLLAPSE_TAU: usize = 80;
const MASTER_CURVE_POINTS: usize = 200;

#[derive(Debug, Parser)]
#[command(
    name = "volcollapse",
    version,
    about = "Gamma-mixture volatility analysis of tick data"
)]
pub struct Cli {
    /// Directory for artifacts and manifests.
    #[arg(long, global = true, env = "VOLCOLLAPSE_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,
    /// Encoding of tabular artifacts: csv or json.
    #[arg(long, global = true, default_value = "csv")]
    pub format: TableFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a quotes file into an event-clock mid-price series.
    Ingest(IngestArgs),
    /// Measure daily β and fit the gamma law.
    Fit(FitArgs),
    /// Empirical return CCDs per horizon, with the model curve.
    Ccd(CcdArgs),
    /// Collapse curves of one or more stocks onto the master curve.
    Collapse(CollapseArgs),
    /// Empirical and predicted tail exponents.
    Tail(TailArgs),
    /// Generate synthetic quotes with known parameters.
    Simulate(SimulateArgs),
    /// Run ingest, fit, ccd, collapse and tail on one quotes file.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Quotes file (`timestamp,bid,ask` or `timestamp,mid`; `.gz` accepted).
    pub input: PathBuf,
    /// Column layout of the input: bid-ask or mid.
    #[arg(long, default_value = "bid-ask")]
    pub input_format: QuoteFormat,
    /// Exchange local time offset from UTC, for assigning trading days.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub utc_offset_seconds: i64,
    /// Stock label; defaults to the input file name without `_quotes` and extensions.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Series artifact written by `ingest`.
    pub series: PathBuf,
    /// Fewest unit returns a day needs to contribute a β.
    #[arg(long, default_value_t = DEFAULT_MIN_EVENTS)]
    pub min_events: usize,
}

#[derive(Debug, Args)]
pub struct CcdArgs {
    pub series: PathBuf,
    /// Gamma fit JSON written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CCD_TAUS)]
    pub tau: Vec<usize>,
    /// Keep raw returns instead of r' = r·sqrt(2β₀/(nτ)).
    #[arg(long)]
    pub unscaled: bool,
    #[arg(long, default_value_t = DEFAULT_CCD_POINTS)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct CollapseArgs {
    /// Series artifacts, one per stock.
    #[arg(long = "series", required = true)]
    pub series: Vec<PathBuf>,
    /// Gamma fits, paired with `--series` by position.
    #[arg(long = "fit", required = true)]
    pub fits: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_COLLAPSE_TAU)]
    pub tau: usize,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[arg(long = "series", required = true)]
    pub series: Vec<PathBuf>,
    #[arg(long = "fit", required = true)]
    pub fits: Vec<PathBuf>,
    /// Fraction of largest |r| used by the Hill estimator.
    #[arg(long, default_value_t = DEFAULT_TOP_FRACTION)]
    pub top_fraction: f64,
    /// Model quantiles used for the predicted exponent.
    #[arg(long, default_value_t = DEFAULT_K_POINTS)]
    pub k_points: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON stock config, or an array of them. Flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long)]
    pub events_per_day: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub initial_price: Option<f64>,
    #[arg(long)]
    pub start_date: Option<NaiveDate>,
    #[arg(long)]
    pub day_start_seconds: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_MIN_EVENTS)]
    pub min_events: usize,
    /// Horizons for the CCDs.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CCD_TAUS)]
    pub tau: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_COLLAPSE_TAU)]
    pub collapse_tau: usize,
    #[arg(long, default_value_t = DEFAULT_TOP_FRACTION)]
    pub top_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_K_POINTS)]
    pub k_points: usize,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let ctx = Context {
        out: cli.output_dir.clone(),
        format: cli.format,
    };
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(&ctx, a),
        Command::Fit(a) => cmd_fit(&ctx, a),
        Command::Ccd(a) => cmd_ccd(&ctx, a),
        Command::Collapse(a) => cmd_collapse(&ctx, a),
        Command::Tail(a) => cmd_tail(&ctx, a),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Pipeline(a) => cmd_pipeline(&ctx, a),
    }
}

struct Context {
    out: PathBuf,
    format: TableFormat,
}

impl Context {
    fn manifest(&self, command: &str) -> RunManifest {
        let mut m = RunManifest::new(command, &self.out);
        m.param("format", self.format.extension());
        m
    }

    fn stem(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Stocks whose labels become file names stick to a safe alphabet.
fn check_label(label: &str) -> Result<()> {
    let ok = !label.is_empty()
        && !label.starts_with('.')
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "label {label:?} must be non-empty and use only letters, digits, '_', '-' and '.'"
        )))
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn strip_suffixes(mut name: String, suffixes: &[&str]) -> String {
    for s in suffixes {
        if let Some(stripped) = name.strip_suffix(s) {
            if !stripped.is_empty() {
                name = stripped.to_string();
            }
        }
    }
    name
}

fn label_from_quotes(path: &Path) -> String {
    strip_suffixes(file_name(path), &[".gz", ".csv", ".txt", "_quotes"])
}

fn label_from_series(path: &Path) -> String {
    strip_suffixes(file_name(path), &[".csv", ".json", ".series"])
}

fn ingest_step(ctx: &Context, args: &InputArgs, manifest: &mut RunManifest) -> Result<(String, MidPriceSeries)> {
    let label = args.name.clone().unwrap_or_else(|| label_from_quotes(&args.input));
    check_label(&label)?;
    manifest.input_paths.push(args.input.clone());
    manifest
        .param("input_format", args.input_format.to_string())
        .param("utc_offset_seconds", args.utc_offset_seconds)
        .param("label", &label);
    let parsed = read_quotes_file(&args.input, args.input_format)?;
    let calendar = DayCalendar {
        utc_offset_seconds: args.utc_offset_seconds,
        sessions: None,
    };
    let series = build_midprice_series(&parsed.ticks, &calendar)?;
    let path = write_series(&ctx.stem(&format!("{label}.series")), &series, ctx.format)?;
    manifest.record(&path);
    println!(
        "{label}: {} events over {} days ({} of {} lines malformed)",
        series.len(),
        series.n_days(),
        parsed.malformed.len(),
        parsed.data_lines
    );
    Ok((label, series))
}

fn fit_step(ctx: &Context, series: &MidPriceSeries, min_events: usize, manifest: &mut RunManifest) -> Result<GammaFit> {
    manifest.param("min_events", min_events);
    let report = daily_beta(series, min_events)?;
    if !report.skipped.is_empty() {
        eprintln!(
            "warning: {} of {} days have fewer than {min_events} unit returns and were skipped",
            report.skipped.len(),
            series.n_days()
        );
    }
    let fit = fit_gamma(&report.betas)?;
    manifest.record(&write_table(&ctx.stem("daily_beta"), &report.betas, ctx.format)?);
    let fit_path = ctx.stem("gamma_fit.json");
    write_json(&fit_path, &fit)?;
    manifest.record(&fit_path);

    let values: Vec<f64> = report.betas.iter().map(|b| b.beta).collect();
    let curve = empirical_ccd(&values, &CcdGrid::default(), false)?;
    let rows = curve_rows(&curve)
        .into_iter()
        .map(|r| {
            Ok(BetaCcdRow {
                x: r.x,
                value: r.value,
                stderr: r.stderr,
                model: gamma_ccd(r.x, &fit)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    manifest.record(&write_table(&ctx.stem("beta_ccd"), &rows, ctx.format)?);
    println!(
        "gamma fit over {} days: n = {:.4}, beta0 = {:.6e}",
        fit.n_days, fit.n, fit.beta0
    );
    Ok(fit)
}

fn curve_rows(c: &CcdCurve) -> Vec<CurveRow> {
    (0..c.abscissae.len())
        .map(|i| CurveRow {
            x: c.abscissae[i],
            value: c.ccd_values[i],
            stderr: c.stderr[i],
        })
        .collect()
}

fn collapse_rows(c: &CollapseCurve) -> Vec<CurveRow> {
    (0..c.abscissae.len())
        .map(|i| CurveRow {
            x: c.abscissae[i],
            value: c.f_values[i],
            stderr: c.stderr[i],
        })
        .collect()
}

fn ccd_step(
    ctx: &Context,
    series: &MidPriceSeries,
    fit: &GammaFit,
    taus: &[usize],
    scaled: bool,
    points: usize,
    manifest: &mut RunManifest,
) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::Invalid("tau list is empty".into()));
    }
    manifest
        .param("tau", taus)
        .param("scaled", scaled)
        .param("points", points);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut written = 0;
    for &tau in taus {
        let returns = extract_returns(series, tau)?;
        let values: Vec<f64> = if scaled {
            let p = ModelParams::from_fit(fit, tau)?;
            returns.returns.iter().map(|&r| scale_return(r, &p)).collect()
        } else {
            returns.returns
        };
        let curve = match empirical_ccd(&values, &CcdGrid::LogSpaced { points }, scaled) {
            Ok(c) => c,
            Err(Error::InsufficientData(msg)) => {
                eprintln!("warning: tau={tau} skipped: {msg}");
                continue;
            }
            Err(e) => return Err(e),
        };
        if let (Some(&a), Some(&b)) = (curve.abscissae.first(), curve.abscissae.last()) {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        let meta = CurveMeta {
            n: Some(fit.n),
            beta0: Some(fit.beta0),
            tau: Some(tau),
            sample_count: curve.sample_count,
            scaled,
        };
        for p in write_curve(
            &ctx.stem(&format!("ccd_tau{tau}")),
            &curve_rows(&curve),
            &meta,
            ctx.format,
        )? {
            manifest.record(&p);
        }
        written += 1;
    }
    if written == 0 {
        return Err(Error::InsufficientData(format!(
            "no horizon in {taus:?} has intraday returns"
        )));
    }
    // The model curve lives in scaled units; without scaling it still
    // serves as the shape reference.
    let (lo, hi) = if scaled { (lo, hi) } else { (0.05, 20.0) };
    let model = theoretical_ccd(&log_space(lo, hi, MASTER_CURVE_POINTS), fit.n)?;
    let meta = CurveMeta {
        n: Some(fit.n),
        beta0: Some(fit.beta0),
        tau: None,
        sample_count: 0,
        scaled: true,
    };
    for p in write_curve(&ctx.stem("ccd_model"), &curve_rows(&model), &meta, ctx.format)? {
        manifest.record(&p);
    }
    println!("wrote {written} empirical CCDs and the model curve");
    Ok(())
}

struct Stock {
    label: String,
    series: MidPriceSeries,
    fit: GammaFit,
}

fn load_stocks(series: &[PathBuf], fits: &[PathBuf], manifest: &mut RunManifest) -> Result<Vec<Stock>> {
    if series.len() != fits.len() {
        return Err(Error::Invalid(format!(
            "{} series but {} fits; every stock needs exactly one fit",
            series.len(),
            fits.len()
        )));
    }
    let mut stocks: Vec<Stock> = Vec::with_capacity(series.len());
    for (s, f) in series.iter().zip(fits) {
        let label = label_from_series(s);
        check_label(&label)?;
        if stocks.iter().any(|st| st.label == label) {
            return Err(Error::Invalid(format!("duplicate stock label {label:?}")));
        }
        manifest.input_paths.extend([s.clone(), f.clone()]);
        stocks.push(Stock {
            label,
            series: read_series(s)?,
            fit: read_json(f)?,
        });
    }
    Ok(stocks)
}

fn collapse_step(ctx: &Context, stocks: &[Stock], tau: usize, manifest: &mut RunManifest) -> Result<()> {
    manifest.param("collapse_tau", tau);
    let mut hi: f64 = 0.0;
    for st in stocks {
        let returns = extract_returns(&st.series, tau)?;
        let curve = empirical_collapse(&returns, &st.fit).map_err(|e| match e {
            Error::InsufficientData(msg) => Error::InsufficientData(format!("{}: {msg}", st.label)),
            other => other,
        })?;
        hi = curve.abscissae.iter().copied().fold(hi, f64::max);
        let meta = CurveMeta {
            n: Some(st.fit.n),
            beta0: Some(st.fit.beta0),
            tau: Some(tau),
            sample_count: curve.sample_count,
            scaled: true,
        };
        for p in write_curve(
            &ctx.stem(&format!("collapse_{}", st.label)),
            &collapse_rows(&curve),
            &meta,
            ctx.format,
        )? {
            manifest.record(&p);
        }
    }
    let master: Vec<CurveRow> = log_space(COLLAPSE_MIN_ABS, hi.max(1.0), MASTER_CURVE_POINTS)
        .into_iter()
        .map(|x| CurveRow {
            x,
            value: master_curve(x),
            stderr: 0.0,
        })
        .collect();
    let meta = CurveMeta {
        n: None,
        beta0: None,
        tau: Some(tau),
        sample_count: 0,
        scaled: true,
    };
    for p in write_curve(&ctx.stem("master_curve"), &master, &meta, ctx.format)? {
        manifest.record(&p);
    }
    println!(
        "wrote {} collapse curves at tau={tau} and the master curve",
        stocks.len()
    );
    Ok(())
}

fn tail_step(
    ctx: &Context,
    stocks: &[Stock],
    top_fraction: f64,
    k_points: usize,
    manifest: &mut RunManifest,
) -> Result<()> {
    manifest.param("top_fraction", top_fraction).param("k_points", k_points);
    let mut scatter = Vec::with_capacity(stocks.len());
    for st in stocks {
        let by_tau = TAIL_TAUS
            .iter()
            .map(|&t| Ok((t, extract_returns(&st.series, t)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let report = tail_report(&st.label, &by_tau, &st.fit, top_fraction, k_points).map_err(|e| match e {
            Error::InsufficientData(msg) => Error::InsufficientData(format!("{}: {msg}", st.label)),
            other => other,
        })?;
        let path = ctx.stem(&format!("tail_{}.json", st.label));
        write_json(&path, &report)?;
        manifest.record(&path);
        println!(
            "{}: tail exponent empirical {:.4}, predicted {:.4}",
            st.label, report.empirical_exponent, report.predicted_exponent
        );
        scatter.push(ScatterRow {
            stock: st.label.clone(),
            empirical: report.empirical_exponent,
            predicted: report.predicted_exponent,
        });
    }
    manifest.record(&write_table(&ctx.stem("tail_scatter"), &scatter, ctx.format)?);
    Ok(())
}

fn finish(manifest: &RunManifest) -> Result<()> {
    manifest.write()?;
    Ok(())
}

fn cmd_ingest(ctx: &Context, args: &IngestArgs) -> Result<()> {
    let mut m = ctx.manifest("ingest");
    ingest_step(ctx, &args.input, &mut m)?;
    finish(&m)
}

fn cmd_fit(ctx: &Context, args: &FitArgs) -> Result<()> {
    let mut m = ctx.manifest("fit");
    m.input_paths.push(args.series.clone());
    let series = read_series(&args.series)?;
    fit_step(ctx, &series, args.min_events, &mut m)?;
    finish(&m)
}

fn cmd_ccd(ctx: &Context, args: &CcdArgs) -> Result<()> {
    let mut m = ctx.manifest("ccd");
    m.input_paths.extend([args.series.clone(), args.fit.clone()]);
    let series = read_series(&args.series)?;
    let fit: GammaFit = read_json(&args.fit)?;
    ccd_step(ctx, &series, &fit, &args.tau, !args.unscaled, args.points, &mut m)?;
    finish(&m)
}

fn cmd_collapse(ctx: &Context, args: &CollapseArgs) -> Result<()> {
    let mut m = ctx.manifest("collapse");
    let stocks = load_stocks(&args.series, &args.fits, &mut m)?;
    collapse_step(ctx, &stocks, args.tau, &mut m)?;
    finish(&m)
}

fn cmd_tail(ctx: &Context, args: &TailArgs) -> Result<()> {
    let mut m = ctx.manifest("tail");
    let stocks = load_stocks(&args.series, &args.fits, &mut m)?;
    tail_step(ctx, &stocks, args.top_fraction, args.k_points, &mut m)?;
    finish(&m)
}

fn cmd_pipeline(ctx: &Context, args: &PipelineArgs) -> Result<()> {
    let mut m = ctx.manifest("pipeline");
    let (label, series) = ingest_step(ctx, &args.input, &mut m)?;
    let fit = fit_step(ctx, &series, args.min_events, &mut m)?;
    ccd_step(ctx, &series, &fit, &args.tau, true, DEFAULT_CCD_POINTS, &mut m)?;
    let stocks = [Stock { label, series, fit }];
    collapse_step(ctx, &stocks, args.collapse_tau, &mut m)?;
    tail_step(ctx, &stocks, args.top_fraction, args.k_points, &mut m)?;
    finish(&m)
}

/// Stock config as read from a file: any field may be left to flags or
/// defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimFields {
    label: Option<String>,
    n: Option<f64>,
    beta0: Option<f64>,
    days: Option<usize>,
    events_per_day: Option<usize>,
    initial_price: Option<f64>,
    rng_seed: Option<u64>,
    start_date: Option<NaiveDate>,
    day_start_seconds: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SimFile {
    One(SimFields),
    Many(Vec<SimFields>),
}

/// Defaults reproduce the reference stock: n = 4.40, β₀ = 1.28e7.
fn resolve_config(args: &SimulateArgs, file: SimFields) -> SimConfig {
    let base = SimConfig::new("ibm", 4.40, 1.28e7, 500, 5000, 42);
    SimConfig {
        label: args.label.clone().or(file.label).unwrap_or(base.label),
        n: args.n.or(file.n).unwrap_or(base.n),
        beta0: args.beta0.or(file.beta0).unwrap_or(base.beta0),
        days: args.days.or(file.days).unwrap_or(base.days),
        events_per_day: args
            .events_per_day
            .or(file.events_per_day)
            .unwrap_or(base.events_per_day),
        initial_price: args.initial_price.or(file.initial_price).unwrap_or(base.initial_price),
        rng_seed: args.seed.or(file.rng_seed).unwrap_or(base.rng_seed),
        start_date: args.start_date.or(file.start_date).unwrap_or(base.start_date),
        day_start_seconds: args
            .day_start_seconds
            .or(file.day_start_seconds)
            .unwrap_or(base.day_start_seconds),
    }
}

fn cmd_simulate(ctx: &Context, args: &SimulateArgs) -> Result<()> {
    let mut m = ctx.manifest("simulate");
    let entries = match &args.config {
        None => vec![SimFields::default()],
        Some(path) => {
            m.input_paths.push(path.clone());
            match read_json::<SimFile>(path)? {
                SimFile::One(f) => vec![f],
                SimFile::Many(v) if v.is_empty() => {
                    return Err(Error::Invalid(format!("{}: config array is empty", path.display())));
                }
                SimFile::Many(v) => v,
            }
        }
    };
    if entries.len() > 1 && args.label.is_some() {
        return Err(Error::Invalid(
            "--label cannot apply to a config with several stocks".into(),
        ));
    }
    let configs: Vec<SimConfig> = entries.into_iter().map(|f| resolve_config(args, f)).collect();
    for c in &configs {
        check_label(&c.label)?;
        c.validate()?;
    }
    if let [only] = configs.as_slice() {
        m.rng_seed = Some(only.rng_seed);
    }
    m.param("stocks", &configs);
    let market = simulate_market(&configs)?;
    for (config, stock) in configs.iter().zip(&market) {
        let quotes = ctx.stem(&format!("{}_quotes.csv", config.label));
        write_atomic(&quotes, |out: &mut dyn Write| write_quotes(config, &stock.series, out))?;
        m.record(&quotes);
        let truth = ctx.stem(&format!("{}_truth.json", config.label));
        write_json(&truth, &SimTruth::from_config(config)?)?;
        m.record(&truth);
        println!(
            "{}: {} days x {} events, n = {}, beta0 = {:e}, seed {}",
            config.label, config.days, config.events_per_day, config.n, config.beta0, config.rng_seed
        );
    }
    finish(&m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_from_file_names() {
        assert_eq!(label_from_quotes(Path::new("/d/ibm_quotes.csv.gz")), "ibm");
        assert_eq!(label_from_quotes(Path::new("vod.csv")), "vod");
        assert_eq!(label_from_quotes(Path::new("_quotes.csv")), "_quotes");
        assert_eq!(label_from_series(Path::new("out/ibm.series.csv")), "ibm");
        assert_eq!(label_from_series(Path::new("out/ibm.series.json")), "ibm");
    }

    #[test]
    fn label_alphabet() {
        assert!(check_label("s1_n2.5").is_ok());
        for bad in ["", "../x", "a/b", ".hidden", "a b"] {
            assert!(check_label(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let cli = Cli::try_parse_from(["volcollapse", "simulate", "--n", "3.5", "--seed", "9"]).unwrap();
        let Command::Simulate(args) = cli.command else {
            panic!("wrong subcommand")
        };
        let file = SimFields {
            n: Some(2.5),
            days: Some(40),
            rng_seed: Some(1),
            ..Default::default()
        };
        let c = resolve_config(&args, file);
        assert_eq!((c.n, c.days, c.rng_seed), (3.5, 40, 9));
        assert_eq!((c.beta0, c.events_per_day, c.label.as_str()), (1.28e7, 5000, "ibm"));
    }

    #[test]
    fn defaults_mirror_reference_choices() {
        let cli = Cli::try_parse_from(["volcollapse", "ccd", "s.series.csv", "--fit", "f.json"]).unwrap();
        let Command::Ccd(args) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(args.tau, DEFAULT_CCD_TAUS);
        assert!(!args.unscaled);
        let cli = Cli::try_parse_from(["volcollapse", "tail", "--series", "a", "--fit", "b"]).unwrap();
        let Command::Tail(args) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(args.top_fraction, 0.05);
        let cli = Cli::try_parse_from([
            "volcollapse",
            "--format",
            "json",
            "collapse",
            "--series",
            "a",
            "--fit",
            "b",
        ])
        .unwrap();
        assert_eq!(cli.format, TableFormat::Json);
        let Command::Collapse(args) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(args.tau, 80);
    }

    #[test]
    fn tau_list_parses_commas() {
        let cli = Cli::try_parse_from(["volcollapse", "ccd", "s", "--fit", "f", "--tau", "10,80"]).unwrap();
        let Command::Ccd(args) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(args.tau, vec![10, 80]);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["volcollapse", "fit"]), 1);
        assert_eq!(run(["volcollapse", "--format", "xml", "fit", "x"]), 1);
    }
}
