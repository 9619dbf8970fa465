//! Threshold-triggered CSV aggregation of sensor readings.
//!
//! Rows accumulate in a named CSV store whose exact serialized size is
//! tracked on every append. Once the size reaches the flush threshold the
//! whole file goes to a [`Sink`] and the store starts over with just its
//! header. A failed send leaves the store untouched.
//!
//! Readings are held as fixed-point integers at their printed precision, so a
//! flushed file parses back to exactly the rows that were appended.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::link::{simulate_transfer, LinkProfile, Outcome, TransferReport};

pub const CSV_HEADER: &str = "timestamp,temperature,humidity,co2,weight,vibration";
pub const DEFAULT_THRESHOLD: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("invalid row: {0}")]
    InvalidRow(String),
    #[error("flush threshold must be at least one octet")]
    ZeroThreshold,
    #[error("aggregation window must be at least one row")]
    ZeroWindow,
    #[error("sink failed, buffer retained: {0}")]
    Sink(String),
    #[error("CSV parse error: {0}")]
    Csv(String),
}

/// One timestamped set of hive readings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SensorRow {
    timestamp: String,
    temperature_dc: i64,
    humidity_dpct: i64,
    co2_ppm: i64,
    weight_cg: i64,
    vibration_c: i64,
}

fn scaled(v: f64, factor: f64, what: &str) -> Result<i64, AggregateError> {
    if !v.is_finite() {
        return Err(AggregateError::InvalidRow(format!("{what} is not finite")));
    }
    Ok((v * factor).round() as i64)
}

fn fmt_fixed(v: i64, decimals: u32) -> String {
    let unit = 10i64.pow(decimals);
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    format!("{sign}{}.{:0width$}", a / unit as u64, a % unit as u64, width = decimals as usize)
}

impl SensorRow {
    /// Values are rounded to their stored precision: temperature and
    /// humidity to 0.1, weight and vibration to 0.01, CO₂ to whole ppm.
    pub fn new(
        timestamp: impl Into<String>,
        temperature: f64,
        humidity: f64,
        co2: f64,
        weight: f64,
        vibration: f64,
    ) -> Result<Self, AggregateError> {
        let row = SensorRow {
            timestamp: timestamp.into(),
            temperature_dc: scaled(temperature, 10.0, "temperature")?,
            humidity_dpct: scaled(humidity, 10.0, "humidity")?,
            co2_ppm: scaled(co2, 1.0, "co2")?,
            weight_cg: scaled(weight, 100.0, "weight")?,
            vibration_c: scaled(vibration, 100.0, "vibration")?,
        };
        row.validate()?;
        Ok(row)
    }

    /// Range and format checks applied before a row enters a store.
    pub fn validate(&self) -> Result<(), AggregateError> {
        let bad = |m: &str| Err(AggregateError::InvalidRow(m.to_string()));
        let ts = &self.timestamp;
        if !ts.ends_with('Z') || chrono::DateTime::parse_from_rfc3339(ts).is_err() {
            return bad("timestamp must be ISO-8601 UTC (e.g. 2024-05-01T12:00:00Z)");
        }
        if !(0..=1000).contains(&self.humidity_dpct) {
            return bad("humidity must be within 0..=100 %RH");
        }
        if self.co2_ppm < 0 {
            return bad("co2 must be non-negative");
        }
        if self.weight_cg < 0 {
            return bad("weight must be non-negative");
        }
        Ok(())
    }

    pub fn timestamp(&self) -> &str {
        &self.timestamp
    }
    pub fn temperature(&self) -> f64 {
        self.temperature_dc as f64 / 10.0
    }
    pub fn humidity(&self) -> f64 {
        self.humidity_dpct as f64 / 10.0
    }
    pub fn co2(&self) -> i64 {
        self.co2_ppm
    }
    pub fn weight(&self) -> f64 {
        self.weight_cg as f64 / 100.0
    }
    pub fn vibration(&self) -> f64 {
        self.vibration_c as f64 / 100.0
    }

    /// Fixed-point columns after the timestamp, in CSV order.
    fn columns(&self) -> [i64; 5] {
        [self.temperature_dc, self.humidity_dpct, self.co2_ppm, self.weight_cg, self.vibration_c]
    }

    fn with_columns(timestamp: String, c: [i64; 5]) -> Self {
        SensorRow {
            timestamp,
            temperature_dc: c[0],
            humidity_dpct: c[1],
            co2_ppm: c[2],
            weight_cg: c[3],
            vibration_c: c[4],
        }
    }

    /// The CSV line for this row, with its trailing LF.
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}\n",
            self.timestamp,
            fmt_fixed(self.temperature_dc, 1),
            fmt_fixed(self.humidity_dpct, 1),
            self.co2_ppm,
            fmt_fixed(self.weight_cg, 2),
            fmt_fixed(self.vibration_c, 2),
        )
    }
}

/// Parses a store's CSV text (header first) back into rows.
pub fn parse_csv(text: &[u8]) -> Result<Vec<SensorRow>, AggregateError> {
    let csv_err = |e: csv::Error| AggregateError::Csv(e.to_string());
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text);
    let header = reader.headers().map_err(csv_err)?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(AggregateError::Csv(format!("unexpected header '{}'", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| -> Result<f64, AggregateError> {
            rec[i].parse().map_err(|_| AggregateError::Csv(format!("bad number '{}'", &rec[i])))
        };
        rows.push(SensorRow::new(&rec[0], field(1)?, field(2)?, field(3)?, field(4)?, field(5)?)?);
    }
    Ok(rows)
}

/// The accumulating CSV store for one named file.
#[derive(Debug, Clone)]
pub struct RowBuffer {
    name: String,
    rows: Vec<SensorRow>,
    text: String,
}

impl RowBuffer {
    /// A store that does not exist yet; the first append creates it.
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), rows: Vec::new(), text: String::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> &[SensorRow] {
        &self.rows
    }

    /// Exact length of the serialized store, header included once created.
    pub fn byte_size(&self) -> u64 {
        self.text.len() as u64
    }

    pub fn contents(&self) -> &str {
        &self.text
    }

    /// Appends a validated row; an invalid row leaves the store unchanged.
    pub fn append_row(&mut self, row: SensorRow) -> Result<(), AggregateError> {
        row.validate()?;
        if self.text.is_empty() {
            self.text.push_str(CSV_HEADER);
            self.text.push('\n');
        }
        self.text.push_str(&row.to_csv_line());
        self.rows.push(row);
        Ok(())
    }

    fn reset(&mut self) {
        self.rows.clear();
        self.text.truncate(CSV_HEADER.len() + 1);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlushPolicy {
    threshold: u64,
}

impl FlushPolicy {
    pub fn new(threshold: u64) -> Result<Self, AggregateError> {
        if threshold == 0 {
            return Err(AggregateError::ZeroThreshold);
        }
        Ok(Self { threshold })
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }
}

impl Default for FlushPolicy {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD }
    }
}

/// What a flush delivered.
#[derive(Debug, Clone, PartialEq)]
pub struct FlushReceipt {
    pub rows: usize,
    pub octets: u64,
    pub destination: String,
    pub transfer: Option<TransferReport>,
}

/// A transfer target for flushed files.
pub trait Sink {
    fn id(&self) -> String;

    /// Delivers one file. A simulated link may attach its transfer report.
    fn send(&mut self, name: &str, octets: &[u8]) -> Result<Option<TransferReport>, String>;
}

/// Flushes iff the store holds rows and has reached the threshold.
pub fn check_and_flush(
    buffer: &mut RowBuffer,
    policy: &FlushPolicy,
    sink: &mut dyn Sink,
) -> Result<Option<FlushReceipt>, AggregateError> {
    if buffer.rows.is_empty() || buffer.byte_size() < policy.threshold {
        return Ok(None);
    }
    let transfer = sink.send(&buffer.name, buffer.text.as_bytes()).map_err(AggregateError::Sink)?;
    let receipt = FlushReceipt {
        rows: buffer.rows.len(),
        octets: buffer.byte_size(),
        destination: sink.id(),
        transfer,
    };
    buffer.reset();
    Ok(Some(receipt))
}

/// Append-then-check driver pairing a store with its policy and sink.
pub struct Aggregator<S: Sink> {
    pub buffer: RowBuffer,
    pub policy: FlushPolicy,
    pub sink: S,
}

impl<S: Sink> Aggregator<S> {
    pub fn new(name: impl Into<String>, policy: FlushPolicy, sink: S) -> Self {
        Self { buffer: RowBuffer::new(name), policy, sink }
    }

    pub fn push(&mut self, row: SensorRow) -> Result<Option<FlushReceipt>, AggregateError> {
        self.buffer.append_row(row)?;
        check_and_flush(&mut self.buffer, &self.policy, &mut self.sink)
    }
}

/// Writes each flushed file into a directory as `<name>_<seq>.csv`.
#[derive(Debug)]
pub struct DirectorySink {
    dir: PathBuf,
    next: u64,
}

impl DirectorySink {
    pub fn new(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { dir: dir.as_ref().to_path_buf(), next: 0 })
    }
}

impl Sink for DirectorySink {
    fn id(&self) -> String {
        self.dir.display().to_string()
    }

    fn send(&mut self, name: &str, octets: &[u8]) -> Result<Option<TransferReport>, String> {
        let path = self.dir.join(format!("{name}_{:06}.csv", self.next));
        fs::write(&path, octets).map_err(|e| format!("{}: {e}", path.display()))?;
        self.next += 1;
        Ok(None)
    }
}

/// Sends over a simulated link. Each send uses `seed + index` so a sequence
/// of flushes is reproducible; a failed transfer is a sink failure.
#[derive(Debug, Clone)]
pub struct LinkSink {
    pub profile: LinkProfile,
    pub seed: u64,
    sent: u64,
}

impl LinkSink {
    pub fn new(profile: LinkProfile, seed: u64) -> Self {
        Self { profile, seed, sent: 0 }
    }
}

impl Sink for LinkSink {
    fn id(&self) -> String {
        format!("link:{}", self.profile.name)
    }

    fn send(&mut self, _name: &str, octets: &[u8]) -> Result<Option<TransferReport>, String> {
        let report = simulate_transfer(octets.len() as u64, &self.profile, self.seed.wrapping_add(self.sent));
        self.sent += 1;
        match report.outcome {
            Outcome::Delivered => Ok(Some(report)),
            Outcome::Failed => Err(format!("transfer over {} failed after {:.3} s", self.profile.name, report.elapsed)),
        }
    }
}

/// Keeps every delivered file in memory.
#[derive(Debug, Default, Clone)]
pub struct MemorySink {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Sink for MemorySink {
    fn id(&self) -> String {
        "memory".into()
    }

    fn send(&mut self, name: &str, octets: &[u8]) -> Result<Option<TransferReport>, String> {
        self.files.push((name.to_string(), octets.to_vec()));
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowStat {
    Sum,
    Average,
}

/// Reduces consecutive non-overlapping windows of `window` rows column by
/// column; the last window may be short. Each output row carries the
/// timestamp of its window's last row. Averages round half away from zero at
/// the column's precision. Summed rows are not range-checked (a humidity sum
/// can exceed 100).
pub fn aggregate_window(rows: &[SensorRow], stat: WindowStat, window: usize) -> Result<Vec<SensorRow>, AggregateError> {
    if window == 0 {
        return Err(AggregateError::ZeroWindow);
    }
    Ok(rows
        .chunks(window)
        .map(|chunk| {
            let mut sums = [0i64; 5];
            for r in chunk {
                for (s, c) in sums.iter_mut().zip(r.columns()) {
                    *s += c;
                }
            }
            let n = chunk.len() as i64;
            let cols = match stat {
                WindowStat::Sum => sums,
                WindowStat::Average => sums.map(|s| (2 * s + s.signum() * n) / (2 * n)),
            };
            SensorRow::with_columns(chunk.last().unwrap().timestamp.clone(), cols)
        })
        .collect())
}
