//! Evaluation formulas: compression ratio, bit error rate, timing,
//! transmission-time decrease, throughput and PSNR.

use std::time::Instant;

use thiserror::Error;

use crate::raster::RgbImage;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no size pairs given")]
    Empty,
    #[error("sizes must be at least one octet")]
    ZeroSize,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("image dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("reference time must be positive, got {0}")]
    NonPositiveTime(f64),
}

/// Original and compressed size of one artifact, in octets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizePair {
    pub original: u64,
    pub compressed: u64,
}

impl SizePair {
    pub fn new(original: u64, compressed: u64) -> Result<Self, MetricsError> {
        if original == 0 || compressed == 0 {
            return Err(MetricsError::ZeroSize);
        }
        Ok(Self { original, compressed })
    }

    pub fn ratio(&self) -> f64 {
        self.original as f64 / self.compressed as f64
    }
}

/// Average compression ratio: Σ original / Σ compressed. This weights large
/// files more heavily than a mean of per-file ratios would.
pub fn acr(pairs: &[SizePair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let orig: u64 = pairs.iter().map(|p| p.original).sum();
    let comp: u64 = pairs.iter().map(|p| p.compressed).sum();
    Ok(orig as f64 / comp as f64)
}

/// Fraction of differing bit positions between two equal-length buffers.
pub fn bper(original: &[u8], decoded: &[u8]) -> Result<f64, MetricsError> {
    if original.len() != decoded.len() {
        return Err(MetricsError::LengthMismatch(original.len(), decoded.len()));
    }
    if original.is_empty() {
        return Err(MetricsError::Empty);
    }
    let wrong: u64 = original
        .iter()
        .zip(decoded)
        .map(|(a, b)| (a ^ b).count_ones() as u64)
        .sum();
    Ok(wrong as f64 / (8 * original.len()) as f64)
}

/// `(before − after) / before × 100`.
pub fn percent_decrease(before: f64, after: f64) -> Result<f64, MetricsError> {
    if before.is_nan() || before <= 0.0 {
        return Err(MetricsError::NonPositiveTime(before));
    }
    Ok((before - after) / before * 100.0)
}

/// Octets per second.
pub fn throughput(size: u64, elapsed: f64) -> Result<f64, MetricsError> {
    if elapsed.is_nan() || elapsed <= 0.0 {
        return Err(MetricsError::NonPositiveTime(elapsed));
    }
    Ok(size as f64 / elapsed)
}

/// PSNR in dB over all RGB samples; identical inputs give `f64::INFINITY`.
pub fn psnr(original: &RgbImage, decoded: &RgbImage) -> Result<f64, MetricsError> {
    if original.dims() != decoded.dims() {
        return Err(MetricsError::DimensionMismatch(original.dims(), decoded.dims()));
    }
    let a = original.as_bytes();
    let b = decoded.as_bytes();
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    let sse: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    let mse = sse / a.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operation {
    Compress,
    Decompress,
    Transfer,
}

/// One wall-clock measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingSample {
    pub operation: Operation,
    pub elapsed: f64,
    pub payload: Option<u64>,
}

/// Runs `thunk` once under a monotonic clock.
pub fn time_operation<T>(operation: Operation, thunk: impl FnOnce() -> T) -> (T, TimingSample) {
    let start = Instant::now();
    let out = thunk();
    let elapsed = start.elapsed().as_secs_f64();
    (out, TimingSample { operation, elapsed, payload: None })
}

/// Sizes and times for one compress/decompress round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionStats {
    pub sizes: SizePair,
    pub compress_time: f64,
    pub decompress_time: f64,
}

impl CompressionStats {
    pub fn ratio(&self) -> f64 {
        self.sizes.ratio()
    }
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Median (mean of the middle pair for even lengths); `None` when empty.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}
