//! Synthetic stocks drawn from the model: one inverse variance β per day
//! from the gamma law, Gaussian event returns with variance 1/β within the
//! day.
//!
//! # Random streams
//!
//! All randomness comes from ChaCha8 seeded with [`SimConfig::rng_seed`]
//! through `SeedableRng::seed_from_u64`. Stream 0 feeds the daily β draws;
//! stream `d + 1` feeds the returns of day `d`. Days can therefore be
//! generated in any order, or in parallel, with identical output.
//!
//! Uniforms use the top 53 bits of one `u64` mapped to the open interval
//! (0, 1). A Gaussian deviate is one Box–Muller cosine branch and always
//! consumes exactly two uniforms. Gamma deviates use Marsaglia–Tsang
//! rejection; each trial consumes one Gaussian and one uniform, plus one
//! extra uniform per draw when the shape is below 1.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::io::Write;

use chrono::{Duration, NaiveDate};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::MidPriceSeries;

const SECONDS_PER_DAY: u32 = 86_400;
const NANOS_PER_SECOND: i64 = 1_000_000_000;

/// Deterministic random source for the simulator.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform deviate in the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    /// Gamma deviate with the given shape and unit scale.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            let boost = self.uniform().powf(1.0 / shape);
            return self.gamma(shape + 1.0) * boost;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let u = self.uniform();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
                return d * v;
            }
        }
    }
}

fn default_initial_price() -> f64 {
    100.0
}

fn default_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2001, 1, 2).expect("valid date")
}

fn default_day_start_seconds() -> u32 {
    9 * 3600 + 30 * 60
}

/// Parameters of one synthetic stock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub label: String,
    /// Gamma tail parameter: β has shape n/2.
    pub n: f64,
    /// Mean inverse variance per event.
    pub beta0: f64,
    pub days: usize,
    pub events_per_day: usize,
    #[serde(default = "default_initial_price")]
    pub initial_price: f64,
    pub rng_seed: u64,
    /// Calendar date of the first simulated day; days are consecutive dates.
    #[serde(default = "default_start_date")]
    pub start_date: NaiveDate,
    /// First event time of each day, seconds after midnight UTC. Events are
    /// one second apart.
    #[serde(default = "default_day_start_seconds")]
    pub day_start_seconds: u32,
}

impl SimConfig {
    pub fn new(
        label: impl Into<String>,
        n: f64,
        beta0: f64,
        days: usize,
        events_per_day: usize,
        rng_seed: u64,
    ) -> Self {
        Self {
            label: label.into(),
            n,
            beta0,
            days,
            events_per_day,
            initial_price: default_initial_price(),
            rng_seed,
            start_date: default_start_date(),
            day_start_seconds: default_day_start_seconds(),
        }
    }

    /// Checks every field, reporting all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.n.is_finite() && self.n > 0.0) {
            problems.push(format!("n must be finite and > 0 (got {})", self.n));
        }
        if !(self.beta0.is_finite() && self.beta0 > 0.0) {
            problems.push(format!("beta0 must be finite and > 0 (got {})", self.beta0));
        }
        if self.days == 0 {
            problems.push("days must be >= 1".to_string());
        }
        if self.events_per_day < 2 {
            problems.push(format!("events_per_day must be >= 2 (got {})", self.events_per_day));
        }
        if !(self.initial_price.is_finite() && self.initial_price > 0.0) {
            problems.push(format!(
                "initial_price must be finite and > 0 (got {})",
                self.initial_price
            ));
        }
        if self.day_start_seconds as usize + self.events_per_day > SECONDS_PER_DAY as usize {
            problems.push(format!(
                "day_start_seconds + events_per_day must fit in one day (got {} + {})",
                self.day_start_seconds, self.events_per_day
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "sim config {:?}: {}",
                self.label,
                problems.join("; ")
            )))
        }
    }

    pub fn day(&self, d: usize) -> NaiveDate {
        self.start_date + Duration::days(d as i64)
    }

    /// Timestamp (ns since epoch) of event `i` of day `d`.
    pub fn timestamp(&self, d: usize, i: usize) -> i64 {
        let midnight = self
            .day(d)
            .and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc()
            .timestamp();
        (midnight + self.day_start_seconds as i64 + i as i64) * NANOS_PER_SECOND
    }
}

/// The per-day inverse variances of a simulated stock.
pub fn draw_beta_days(config: &SimConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let shape = 0.5 * config.n;
    let scale = config.beta0 / shape;
    let mut rng = SimRng::new(config.rng_seed, 0);
    Ok((0..config.days).map(|_| rng.gamma(shape) * scale).collect())
}

/// Simulates the event-clock mid-price path of one stock.
///
/// Each day holds `events_per_day` events. The first event of a day is one
/// Gaussian step (with that day's β) from the previous close, so the price is
/// continuous across days; the within-day return count at τ = 1 is
/// `events_per_day - 1`.
pub fn simulate_stock(config: &SimConfig) -> Result<MidPriceSeries> {
    let betas = draw_beta_days(config)?;
    let total = config.days * config.events_per_day;
    let mut prices = Vec::with_capacity(total);
    let mut day_boundaries = Vec::with_capacity(config.days);
    let mut days = Vec::with_capacity(config.days);
    let mut price = config.initial_price;
    for (d, beta) in betas.iter().enumerate() {
        let sigma = beta.recip().sqrt();
        let mut rng = SimRng::new(config.rng_seed, d as u64 + 1);
        day_boundaries.push(prices.len());
        days.push(config.day(d));
        for _ in 0..config.events_per_day {
            // A step that rounds to no price change would not be an event.
            let next = loop {
                let candidate = price * (sigma * rng.normal()).exp();
                if candidate != price {
                    break candidate;
                }
            };
            price = next;
            prices.push(price);
        }
    }
    MidPriceSeries::new(prices, day_boundaries, days)
}

/// A simulated stock with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub label: String,
    pub series: MidPriceSeries,
}

/// Simulates several independent stocks. Labels must be distinct.
pub fn simulate_market(configs: &[SimConfig]) -> Result<Vec<LabeledSeries>> {
    let mut seen = BTreeSet::new();
    for c in configs {
        if !seen.insert(c.label.as_str()) {
            return Err(Error::Invalid(format!("duplicate stock label {:?}", c.label)));
        }
    }
    configs
        .iter()
        .map(|c| {
            Ok(LabeledSeries {
                label: c.label.clone(),
                series: simulate_stock(c)?,
            })
        })
        .collect()
}

/// Writes a simulated stock as `timestamp,mid` quotes, one event per second
/// from `day_start_seconds` each day.
pub fn write_quotes<W: Write>(config: &SimConfig, series: &MidPriceSeries, mut out: W) -> Result<()> {
    let io_err = |e| Error::io("<quote output>", e);
    writeln!(out, "timestamp,mid").map_err(io_err)?;
    for (d, (_, prices)) in series.day_slices().enumerate() {
        for (i, p) in prices.iter().enumerate() {
            writeln!(out, "{},{}", config.timestamp(d, i), p).map_err(io_err)?;
        }
    }
    Ok(())
}

/// Ground truth of a simulation, for oracle comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub label: String,
    pub n: f64,
    pub beta0: f64,
    pub rng_seed: u64,
    pub events_per_day: usize,
    pub day_betas: Vec<f64>,
}

impl SimTruth {
    pub fn from_config(config: &SimConfig) -> Result<Self> {
        Ok(Self {
            label: config.label.clone(),
            n: config.n,
            beta0: config.beta0,
            rng_seed: config.rng_seed,
            events_per_day: config.events_per_day,
            day_betas: draw_beta_days(config)?,
        })
    }
}
