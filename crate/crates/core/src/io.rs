//! Artifact files: atomic writes, tables in CSV or JSON, run manifests.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::MidPriceSeries;

/// Encoding of tabular artifacts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TableFormat {
    #[default]
    Csv,
    /// A JSON array with one object per row.
    Json,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }

    /// Format implied by a file extension; anything but `.json` is CSV.
    pub fn of_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => TableFormat::Json,
            _ => TableFormat::Csv,
        }
    }
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(Error::Invalid(format!(
                "unknown table format {other:?} (expected csv or json)"
            ))),
        }
    }
}

impl fmt::Display for TableFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Writes `path` through a temporary file in the same directory, renamed
/// into place once `body` succeeds. Readers never see a partial file.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        body(&mut out)?;
        out.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        writeln!(out).map_err(|e| Error::io(path, e))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `rows` to `<stem>.<ext>` and returns the path written.
pub fn write_table<T: Serialize>(stem: &Path, rows: &[T], format: TableFormat) -> Result<PathBuf> {
    let path = with_extension(stem, format.extension());
    match format {
        TableFormat::Json => write_json(&path, rows)?,
        TableFormat::Csv => write_atomic(&path, |out| {
            let csv_err = |source| Error::Csv {
                path: path.clone(),
                source,
            };
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io(&path, e))
        })?,
    }
    Ok(path)
}

/// Reads a table written by [`write_table`], choosing the format by extension.
pub fn read_table<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    match TableFormat::of_path(path) {
        TableFormat::Json => read_json(path),
        TableFormat::Csv => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            csv::Reader::from_reader(BufReader::new(file))
                .deserialize()
                .collect::<std::result::Result<Vec<T>, _>>()
                .map_err(|source| Error::Csv {
                    path: path.to_path_buf(),
                    source,
                })
        }
    }
}

// Appends rather than replaces, so stems like `ccd_tau10` or `a.series` survive.
fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// One event of a stored mid-price series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub day: NaiveDate,
    pub mid: f64,
}

pub fn series_rows(series: &MidPriceSeries) -> Vec<SeriesRow> {
    series
        .day_slices()
        .flat_map(|(day, prices)| prices.iter().map(move |&mid| SeriesRow { day, mid }))
        .collect()
}

/// Rebuilds a series from rows grouped by strictly increasing day.
pub fn series_from_rows(rows: &[SeriesRow]) -> Result<MidPriceSeries> {
    let mut prices = Vec::with_capacity(rows.len());
    let mut day_boundaries = Vec::new();
    let mut days: Vec<NaiveDate> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match days.last() {
            Some(&last) if row.day == last => {}
            Some(&last) if row.day < last => {
                return Err(Error::Invalid(format!(
                    "series row {}: day {} follows {last}; days must not decrease",
                    i + 1,
                    row.day
                )));
            }
            _ => {
                day_boundaries.push(prices.len());
                days.push(row.day);
            }
        }
        prices.push(row.mid);
    }
    MidPriceSeries::new(prices, day_boundaries, days)
}

pub fn write_series(stem: &Path, series: &MidPriceSeries, format: TableFormat) -> Result<PathBuf> {
    write_table(stem, &series_rows(series), format)
}

pub fn read_series(path: &Path) -> Result<MidPriceSeries> {
    series_from_rows(&read_table(path)?)
}

/// One point of a CCD or collapse curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
}

/// Empirical β CCD next to the fitted gamma CCD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaCcdRow {
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
    pub model: f64,
}

/// One stock's point in the predicted-vs-empirical tail exponent scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub stock: String,
    pub empirical: f64,
    pub predicted: f64,
}

/// Sidecar describing a curve file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    pub sample_count: usize,
    pub scaled: bool,
}

/// Writes `<stem>.<ext>` and its sidecar `<stem>.meta.json`.
pub fn write_curve(stem: &Path, rows: &[CurveRow], meta: &CurveMeta, format: TableFormat) -> Result<Vec<PathBuf>> {
    let table = write_table(stem, rows, format)?;
    let sidecar = with_extension(stem, "meta.json");
    write_json(&sidecar, meta)?;
    Ok(vec![table, sidecar])
}

/// Record of one command invocation, enough to reproduce its artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub input_paths: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tool_version: String,
    pub rng_seed: Option<u64>,
    /// File names written, relative to `output_dir`.
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, output_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            input_paths: Vec::new(),
            output_dir: output_dir.to_path_buf(),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_seed: None,
            artifacts: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).expect("parameter values serialize to JSON");
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn record(&mut self, artifact: &Path) {
        let name = artifact
            .strip_prefix(&self.output_dir)
            .unwrap_or(artifact)
            .to_string_lossy()
            .into_owned();
        if !self.artifacts.contains(&name) {
            self.artifacts.push(name);
        }
    }

    /// Path the manifest is written to: `<output_dir>/<command>.manifest.json`.
    pub fn path(&self) -> PathBuf {
        self.output_dir.join(format!("{}.manifest.json", self.command))
    }

    pub fn write(&self) -> Result<PathBuf> {
        let path = self.path();
        write_json(&path, self)?;
        Ok(path)
    }
}
