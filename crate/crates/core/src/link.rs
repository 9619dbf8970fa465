//! Seeded channel simulator for Wi-Fi and GSM/GPRS style links.
//!
//! A transfer pays the profile latency once, then sends the payload in
//! fixed-size chunks. Each chunk attempt is lost independently with the
//! profile's loss probability; a lost attempt costs the full timeout and is
//! retried, and a chunk that is lost `1 + max_retries` times fails the
//! transfer. Randomness comes from [`ChaCha8Rng`] seeded with
//! `seed_from_u64(seed)`, one `f64` draw per attempt, and nothing is drawn
//! when the loss probability is zero.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Name of the generator behind [`simulate_transfer`], for reports.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha, seed_from_u64)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("profile file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("calibration needs at least two observations with distinct sizes")]
    TooFewObservations,
    #[error("calibration produced a non-positive bandwidth (slope {0})")]
    DegenerateFit(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkProfile {
    pub name: String,
    /// Octets per second.
    pub bandwidth: f64,
    /// Seconds of setup per transfer.
    pub latency: f64,
    /// Octets per chunk.
    pub chunk_size: u64,
    /// Per-attempt loss probability in `[0, 1)`.
    pub loss: f64,
    /// Seconds lost per dropped chunk attempt.
    pub timeout: f64,
    pub max_retries: u32,
}

impl LinkProfile {
    /// Local Wi-Fi: fast and latency-dominated for small payloads.
    pub fn wifi() -> Self {
        Self {
            name: "wifi".into(),
            bandwidth: 1_185_883.0,
            latency: 1.4,
            chunk_size: 16 * 1024,
            loss: 0.001,
            timeout: 5.0,
            max_retries: 10,
        }
    }

    /// 2G/3G cellular: roughly a kilobyte per second with long timeouts.
    pub fn gsm() -> Self {
        Self {
            name: "gsm".into(),
            bandwidth: 1_100.0,
            latency: 5.0,
            chunk_size: 1024,
            loss: 0.01,
            timeout: 30.0,
            max_retries: 10,
        }
    }

    /// Looks up a shipped profile by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "wifi" => Some(Self::wifi()),
            "gsm" => Some(Self::gsm()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |m: &str| Err(LinkError::InvalidProfile(format!("{}: {m}", self.name)));
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return bad("bandwidth must be positive");
        }
        if !(self.latency >= 0.0 && self.latency.is_finite()) {
            return bad("latency must be non-negative");
        }
        if self.chunk_size == 0 {
            return bad("chunk size must be positive");
        }
        if !(0.0..1.0).contains(&self.loss) {
            return bad("loss must be in [0, 1)");
        }
        if !(self.timeout > self.chunk_size as f64 / self.bandwidth) {
            return bad("timeout must exceed one chunk's transmission time");
        }
        Ok(())
    }

    /// Parses the `key=value` profile format. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, LinkError> {
        let mut p = LinkProfile { name: "custom".into(), ..Self::wifi() };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| LinkError::Parse { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: FromStr>(v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("cannot parse '{v}'"))
            }
            match key {
                "name" => p.name = value.to_string(),
                "bandwidth" => p.bandwidth = num(value).map_err(err)?,
                "latency" => p.latency = num(value).map_err(err)?,
                "chunk" | "chunk_size" => p.chunk_size = num(value).map_err(err)?,
                "loss" => p.loss = num(value).map_err(err)?,
                "timeout" => p.timeout = num(value).map_err(err)?,
                "retries" | "max_retries" => p.max_retries = num(value).map_err(err)?,
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for LinkProfile {
    /// Writes the `key=value` profile format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name={}", self.name)?;
        writeln!(f, "bandwidth={}", self.bandwidth)?;
        writeln!(f, "latency={}", self.latency)?;
        writeln!(f, "chunk={}", self.chunk_size)?;
        writeln!(f, "loss={}", self.loss)?;
        writeln!(f, "timeout={}", self.timeout)?;
        writeln!(f, "retries={}", self.max_retries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Delivered,
    Failed,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Delivered => "delivered",
            Outcome::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub size: u64,
    pub elapsed: f64,
    /// Chunk attempts, including retransmissions.
    pub chunks_sent: u64,
    pub retransmissions: u64,
    pub outcome: Outcome,
    pub seed: u64,
    pub rng: &'static str,
}

impl TransferReport {
    pub const CSV_HEADER: &'static str = "size,elapsed,chunks,retransmissions,outcome,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{},{},{},{}",
            self.size, self.elapsed, self.chunks_sent, self.retransmissions, self.outcome, self.seed
        )
    }
}

/// Chunk lengths of a `size`-octet payload.
fn chunk_lengths(size: u64, chunk: u64) -> impl Iterator<Item = u64> {
    let full = size / chunk;
    let rest = size % chunk;
    std::iter::repeat_n(chunk, full as usize).chain((rest > 0).then_some(rest))
}

/// Simulates one transfer. Pure in `(size, profile, seed)`.
pub fn simulate_transfer(size: u64, p: &LinkProfile, seed: u64) -> TransferReport {
    let mut rng = (p.loss > 0.0).then(|| ChaCha8Rng::seed_from_u64(seed));
    let mut elapsed = p.latency;
    let mut chunks_sent = 0u64;
    let mut retransmissions = 0u64;
    let mut outcome = Outcome::Delivered;

    'chunks: for len in chunk_lengths(size, p.chunk_size) {
        let mut attempt = 0u32;
        loop {
            chunks_sent += 1;
            if attempt > 0 {
                retransmissions += 1;
            }
            let lost = match rng.as_mut() {
                Some(r) => r.random::<f64>() < p.loss,
                None => false,
            };
            if !lost {
                elapsed += len as f64 / p.bandwidth;
                break;
            }
            elapsed += p.timeout;
            if attempt == p.max_retries {
                outcome = Outcome::Failed;
                break 'chunks;
            }
            attempt += 1;
        }
    }

    TransferReport { size, elapsed, chunks_sent, retransmissions, outcome, seed, rng: RNG_ALGORITHM }
}

/// Expected elapsed time with unbounded retries:
/// `latency + size / bandwidth + chunks × loss / (1 − loss) × timeout`.
pub fn expected_time(size: u64, p: &LinkProfile) -> f64 {
    let chunks = size.div_ceil(p.chunk_size) as f64;
    p.latency + size as f64 / p.bandwidth + chunks * p.loss / (1.0 - p.loss) * p.timeout
}

/// A measured transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationObservation {
    pub size: u64,
    pub seconds: f64,
}

/// A calibrated profile plus how well it fits its observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub profile: LinkProfile,
    pub mean_abs_error: f64,
}

/// Least-squares fit of `time = latency + size / bandwidth`, loss fixed at 0.
pub fn calibrate(observations: &[CalibrationObservation]) -> Result<Calibration, LinkError> {
    let n = observations.len() as f64;
    if observations.len() < 2 || observations.iter().all(|o| o.size == observations[0].size) {
        return Err(LinkError::TooFewObservations);
    }
    let mx = observations.iter().map(|o| o.size as f64).sum::<f64>() / n;
    let my = observations.iter().map(|o| o.seconds).sum::<f64>() / n;
    let sxy: f64 = observations.iter().map(|o| (o.size as f64 - mx) * (o.seconds - my)).sum();
    let sxx: f64 = observations.iter().map(|o| (o.size as f64 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope > 0.0) {
        return Err(LinkError::DegenerateFit(slope));
    }
    let bandwidth = 1.0 / slope;
    let latency = (my - slope * mx).max(0.0);
    let chunk_size = 16 * 1024;
    let profile = LinkProfile {
        name: "calibrated".into(),
        bandwidth,
        latency,
        chunk_size,
        loss: 0.0,
        timeout: (10.0 * chunk_size as f64 / bandwidth).max(1.0),
        max_retries: 10,
    };
    let mean_abs_error = observations
        .iter()
        .map(|o| (expected_time(o.size, &profile) - o.seconds).abs())
        .sum::<f64>()
        / n;
    Ok(Calibration { profile, mean_abs_error })
}
