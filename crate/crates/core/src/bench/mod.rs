//! Benchmark harness producing `table1.csv` … `table4.csv` and `meta.txt`.
//!
//! Inputs come from a corpus directory (`.ppm` images and subdirectories of
//! `frame_%06d.ppm` sequences) or, without one, from seeded synthetic scenes.
//! Every table is written only after its ratio columns have been recomputed
//! from the size columns and found consistent. When the bzip2 tool is
//! missing, baseline cells are left empty.

pub mod baseline;
pub mod scene;

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aggregate::{AggregateError, RowBuffer, SensorRow};
use crate::codec::{Quality, Subsampling};
use crate::image::{decode_image, encode_image, read_ppm, ImageError, PpmError};
use crate::link::{calibrate, simulate_transfer, CalibrationObservation, LinkProfile, RNG_ALGORITHM};
use crate::metrics::{bper, mean, median, time_operation, Operation};
use crate::raster::RgbImage;
use crate::video::{decode_video, encode_video, read_frame_dir, FrameRate, FrameSequence, VideoError, VideoParams};

pub use baseline::{bzip2_compress, bzip2_decompress, bzip2_version, BaselineError};
pub use scene::{base_texture, generate_scene, Motion, SyntheticScene};

/// Row counts swept by the aggregation study.
pub const DEFAULT_ROW_COUNTS: [usize; 16] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 30, 40, 50, 100, 100_000];

/// Wi-Fi `(size, average seconds)` pairs from the published transfer table,
/// used to report how well a two-parameter link model fits them.
pub const PUBLISHED_WIFI_TIMES: [(u64, f64); 10] = [
    (134_101, 1.567),
    (373_718, 1.700),
    (601_929, 1.767),
    (752_216, 1.900),
    (972_339, 1.833),
    (1_179_606, 1.967),
    (1_364_544, 1.833),
    (1_595_435, 2.100),
    (1_907_795, 1.900),
    (2_332_089, 1.967),
];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("corpus not found: {}", .0.display())]
    CorpusMissing(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Video(#[from] VideoError),
    #[error(transparent)]
    Ppm(#[from] PpmError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Baseline(BaselineError),
    #[error("{0}")]
    Io(String),
    #[error("{table}: ratio column {column} disagrees with its size columns in row {row}")]
    Inconsistent { table: &'static str, column: String, row: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Image,
    Video,
    Aggregation,
    All,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub corpus: Option<PathBuf>,
    pub qualities: Vec<Quality>,
    pub profiles: Vec<LinkProfile>,
    pub runs: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Side lengths of the synthetic square images.
    pub image_sizes: Vec<usize>,
    /// Synthetic video lengths in seconds at 8 fps.
    pub video_durations: Vec<u32>,
    pub video_size: (usize, usize),
    pub video: VideoParams,
    pub row_counts: Vec<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            qualities: vec![Quality::DEFAULT],
            profiles: vec![LinkProfile::wifi(), LinkProfile::gsm()],
            runs: 3,
            out_dir: PathBuf::from("bench-out"),
            seed: 1,
            image_sizes: vec![100, 500, 1000],
            video_durations: vec![2, 4, 6, 8, 10],
            video_size: (320, 240),
            video: VideoParams::default(),
            row_counts: DEFAULT_ROW_COUNTS.to_vec(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.runs == 0 {
            return Err(BenchError::Config("runs must be at least 1".into()));
        }
        if self.profiles.is_empty() {
            return Err(BenchError::Config("at least one link profile is required".into()));
        }
        if let Some(c) = &self.corpus {
            if !c.is_dir() {
                return Err(BenchError::CorpusMissing(c.clone()));
            }
        }
        Ok(())
    }
}

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: Vec<String>) -> Self {
        Self { name, header, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Checks every `(original, compressed, ratio)` column triple: the ratio
    /// cell must equal original / compressed to its printed precision.
    fn check_ratios(&self, triples: &[(String, String, String)]) -> Result<(), BenchError> {
        for (o, c, r) in triples {
            let idx = |n: &str| self.column(n).unwrap_or_else(|| panic!("{}: no column {n}", self.name));
            let (oi, ci, ri) = (idx(o), idx(c), idx(r));
            for (row, cells) in self.rows.iter().enumerate() {
                if cells[ri].is_empty() && cells[ci].is_empty() {
                    continue;
                }
                let parse = |s: &str| s.parse::<f64>().ok();
                let ok = match (parse(&cells[oi]), parse(&cells[ci]), parse(&cells[ri])) {
                    (Some(o), Some(c), Some(r)) => (o / c - r).abs() <= 0.5e-4 * (1.0 + r.abs() * 1e-9),
                    _ => false,
                };
                if !ok {
                    return Err(BenchError::Inconsistent { table: self.name, column: r.clone(), row });
                }
            }
        }
        Ok(())
    }

    fn write(&self, dir: &Path) -> Result<PathBuf, BenchError> {
        let path = dir.join(format!("{}.csv", self.name));
        fs::write(&path, self.to_csv()).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

fn ratio_cell(original: u64, compressed: u64) -> String {
    format!("{:.4}", original as f64 / compressed as f64)
}

fn secs(v: f64) -> String {
    format!("{v:.6}")
}

fn opt_cell<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

/// Baseline size, `None` when the tool is missing.
fn baseline_size(octets: &[u8]) -> Result<Option<u64>, BenchError> {
    match bzip2_compress(octets) {
        Ok(c) => Ok(Some(c.len() as u64)),
        Err(BaselineError::Unavailable(_)) => Ok(None),
        Err(e) => Err(BenchError::Baseline(e)),
    }
}

/// Deterministic seed stream for simulated transfers.
struct Seeds(u64);

impl Seeds {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(1);
        self.0
    }
}

fn mean_transfer(size: u64, p: &LinkProfile, runs: usize, seeds: &mut Seeds) -> f64 {
    let times: Vec<f64> = (0..runs).map(|_| simulate_transfer(size, p, seeds.next()).elapsed).collect();
    mean(&times).unwrap()
}

pub struct ImageInput {
    pub id: String,
    pub image: RgbImage,
}

pub struct VideoInput {
    pub id: String,
    pub frames: FrameSequence,
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> BenchError + '_ {
    move |e| BenchError::Io(format!("{}: {e}", path.display()))
}

/// Corpus contents in file-name order. Sequences are read at 8 fps.
pub fn load_corpus(dir: &Path) -> Result<(Vec<ImageInput>, Vec<VideoInput>), BenchError> {
    if !dir.is_dir() {
        return Err(BenchError::CorpusMissing(dir.to_path_buf()));
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(dir).map_err(io(dir))?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>().map_err(io(dir))?;
    entries.sort();
    let (mut images, mut videos) = (Vec::new(), Vec::new());
    for path in entries {
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if path.is_dir() {
            match read_frame_dir(&path, FrameRate::fps(8).unwrap()) {
                Ok(frames) => videos.push(VideoInput { id, frames }),
                Err(VideoError::Empty) => {}
                Err(e) => return Err(e.into()),
            }
        } else if path.extension().is_some_and(|e| e == "ppm") {
            images.push(ImageInput { id, image: read_ppm(&fs::read(&path).map_err(io(&path))?)? });
        }
    }
    Ok((images, videos))
}

fn image_inputs(config: &BenchConfig) -> Result<Vec<ImageInput>, BenchError> {
    if let Some(c) = &config.corpus {
        return Ok(load_corpus(c)?.0);
    }
    Ok(config
        .image_sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| ImageInput { id: format!("synthetic_{s}x{s}"), image: base_texture(s, s, config.seed + i as u64) })
        .collect())
}

fn video_inputs(config: &BenchConfig) -> Result<Vec<VideoInput>, BenchError> {
    if let Some(c) = &config.corpus {
        return Ok(load_corpus(c)?.1);
    }
    let (w, h) = config.video_size;
    Ok(config
        .video_durations
        .iter()
        .filter(|&&d| d > 0)
        .map(|&d| {
            let scene = SyntheticScene::new(w, h, d as usize * 8, Motion::Drift { dx: 1, dy: 0 }, config.seed);
            VideoInput { id: format!("synthetic_{d}s"), frames: generate_scene(&scene) }
        })
        .collect())
}

/// Image sweep: one row per input, one column group per quality.
pub fn bench_image(config: &BenchConfig) -> Result<Table, BenchError> {
    config.validate()?;
    let mut header: Vec<String> =
        ["input", "width", "height", "original_size", "bzip2_size", "bzip2_ratio"].map(String::from).to_vec();
    for p in &config.profiles {
        header.push(format!("{}_original_s", p.name));
        header.push(format!("{}_bzip2_s", p.name));
    }
    let mut triples = vec![("original_size".to_string(), "bzip2_size".to_string(), "bzip2_ratio".to_string())];
    for q in &config.qualities {
        for col in ["size", "ratio", "ct_s", "dt_s", "bper"] {
            header.push(format!("q{q}_{col}"));
        }
        for p in &config.profiles {
            header.push(format!("q{q}_{}_s", p.name));
        }
        triples.push(("original_size".into(), format!("q{q}_size"), format!("q{q}_ratio")));
    }
    let mut table = Table::new("table3", header);
    let mut seeds = Seeds(config.seed.wrapping_mul(1_000_003));

    for input in image_inputs(config)? {
        let img = &input.image;
        let original = img.as_bytes().len() as u64;
        let base = baseline_size(img.as_bytes())?;
        let mut row = vec![
            input.id.clone(),
            img.width().to_string(),
            img.height().to_string(),
            original.to_string(),
            opt_cell(base, |b| b.to_string()),
            opt_cell(base, |b| ratio_cell(original, b)),
        ];
        for p in &config.profiles {
            row.push(secs(mean_transfer(original, p, config.runs, &mut seeds)));
            row.push(opt_cell(base, |b| secs(mean_transfer(b, p, config.runs, &mut seeds))));
        }
        for &q in &config.qualities {
            let (mut ct, mut dt) = (Vec::new(), Vec::new());
            let mut last = None;
            for _ in 0..config.runs {
                let (c, t) = time_operation(Operation::Compress, || encode_image(img, q, Subsampling::S420));
                let c = c?;
                let (d, u) = time_operation(Operation::Decompress, || decode_image(&c));
                ct.push(t.elapsed);
                dt.push(u.elapsed);
                last = Some((c, d?));
            }
            let (c, decoded) = last.unwrap();
            let size = c.encoded_len() as u64;
            row.extend([
                size.to_string(),
                ratio_cell(original, size),
                secs(mean(&ct).unwrap()),
                secs(mean(&dt).unwrap()),
                format!("{:.6}", bper(img.as_bytes(), decoded.as_bytes()).expect("same dimensions")),
            ]);
            for p in &config.profiles {
                row.push(secs(mean_transfer(size, p, config.runs, &mut seeds)));
            }
        }
        table.rows.push(row);
    }
    table.check_ratios(&triples)?;
    Ok(table)
}

/// Video sweep (`table1`) and the matching transfer study (`table2`).
pub fn bench_video(config: &BenchConfig) -> Result<(Table, Table), BenchError> {
    config.validate()?;
    let runs = config.runs;
    let mut h1: Vec<String> = ["input", "duration_s", "frames", "original_size", "bzip2_size", "algorithm_size", "bzip2_ratio", "algorithm_ratio"]
        .map(String::from)
        .to_vec();
    for op in ["ct", "dt"] {
        h1.extend((1..=runs).map(|i| format!("{op}_run{i}_s")));
        h1.push(format!("{op}_avg_s"));
        h1.push(format!("{op}_median_s"));
    }
    let mut h2: Vec<String> = vec!["input".into(), "algorithm_size".into()];
    for p in &config.profiles {
        h1.extend(["original", "bzip2", "algorithm"].map(|k| format!("{}_{k}_s", p.name)));
        h2.push(format!("{}_avg_s", p.name));
        h2.push(format!("{}_bytes_per_s", p.name));
    }
    let mut t1 = Table::new("table1", h1);
    let mut t2 = Table::new("table2", h2);
    let mut seeds = Seeds(config.seed.wrapping_mul(2_000_003));

    for input in video_inputs(config)? {
        let seq = &input.frames;
        let original = seq.raw_size();
        let raw: Vec<u8> = seq.frames().iter().flat_map(|f| f.as_bytes().iter().copied()).collect();
        let base = baseline_size(&raw)?;
        drop(raw);

        let (mut ct, mut dt) = (Vec::new(), Vec::new());
        let mut size = 0u64;
        for _ in 0..runs {
            let (c, t) = time_operation(Operation::Compress, || encode_video(seq, config.video));
            let c = c?;
            let (d, u) = time_operation(Operation::Decompress, || decode_video(&c));
            d?;
            size = c.encoded_len() as u64;
            ct.push(t.elapsed);
            dt.push(u.elapsed);
        }

        let mut row = vec![
            input.id.clone(),
            format!("{:.3}", seq.len() as f64 / seq.frame_rate().as_f64()),
            seq.len().to_string(),
            original.to_string(),
            opt_cell(base, |b| b.to_string()),
            size.to_string(),
            opt_cell(base, |b| ratio_cell(original, b)),
            ratio_cell(original, size),
        ];
        for times in [&ct, &dt] {
            row.extend(times.iter().map(|&t| secs(t)));
            row.push(secs(mean(times).unwrap()));
            row.push(secs(median(times).unwrap()));
        }
        let mut row2 = vec![input.id.clone(), size.to_string()];
        for p in &config.profiles {
            row.push(secs(mean_transfer(original, p, runs, &mut seeds)));
            row.push(opt_cell(base, |b| secs(mean_transfer(b, p, runs, &mut seeds))));
            let t = mean_transfer(size, p, runs, &mut seeds);
            row.push(secs(t));
            row2.push(secs(t));
            row2.push(format!("{:.2}", size as f64 / t));
        }
        t1.rows.push(row);
        t2.rows.push(row2);
    }
    t1.check_ratios(&[
        ("original_size".into(), "bzip2_size".into(), "bzip2_ratio".into()),
        ("original_size".into(), "algorithm_size".into(), "algorithm_ratio".into()),
    ])?;
    Ok((t1, t2))
}

/// Seeded sensor readings, one minute apart.
pub fn synthetic_rows(n: usize, seed: u64) -> Vec<SensorRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = chrono::DateTime::from_timestamp(1_714_521_600, 0).expect("valid epoch");
    (0..n)
        .map(|i| {
            let ts = (start + chrono::Duration::minutes(i as i64)).format("%Y-%m-%dT%H:%M:%SZ").to_string();
            SensorRow::new(
                ts,
                rng.random_range(15.0..38.0),
                rng.random_range(30.0..90.0),
                rng.random_range(400.0..5000.0f64).round(),
                rng.random_range(20.0..80.0),
                rng.random_range(0.0..2.0),
            )
            .expect("generated readings are in range")
        })
        .collect()
}

/// Aggregation study (`table4`) over the first configured profile.
pub fn bench_aggregation(config: &BenchConfig) -> Result<Table, BenchError> {
    config.validate()?;
    let p = &config.profiles[0];
    let mut header: Vec<String> = vec!["rows".into(), "size".into()];
    header.extend((1..=config.runs).map(|i| format!("t{i}_s")));
    header.extend(["average_s", "median_s"].map(String::from));
    let mut table = Table::new("table4", header);
    let rows = synthetic_rows(config.row_counts.iter().copied().max().unwrap_or(0), config.seed);
    let mut seeds = Seeds(config.seed.wrapping_mul(3_000_017));
    for &n in &config.row_counts {
        if n == 0 {
            continue;
        }
        let mut buffer = RowBuffer::new("hive");
        for r in &rows[..n] {
            buffer.append_row(r.clone())?;
        }
        let size = buffer.byte_size();
        let times: Vec<f64> = (0..config.runs).map(|_| simulate_transfer(size, p, seeds.next()).elapsed).collect();
        let mut row = vec![n.to_string(), size.to_string()];
        row.extend(times.iter().map(|&t| secs(t)));
        row.push(secs(mean(&times).unwrap()));
        row.push(secs(median(&times).unwrap()));
        table.rows.push(row);
    }
    Ok(table)
}

/// Metadata lines: versions, seeds, parameters, profiles and the fit of the
/// published Wi-Fi times.
pub fn meta(config: &BenchConfig) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
    line("hivekit", env!("CARGO_PKG_VERSION").to_string());
    line("bzip2", bzip2_version().unwrap_or_else(|| "unavailable".into()));
    line("rng", RNG_ALGORITHM.to_string());
    line("seed", config.seed.to_string());
    line("runs", config.runs.to_string());
    line("qualities", config.qualities.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","));
    line(
        "video",
        format!(
            "q={} gop={} range={} size={}x{} fps=8",
            config.video.quality, config.video.gop, config.video.range, config.video_size.0, config.video_size.1
        ),
    );
    line("corpus", config.corpus.as_ref().map(|c| c.display().to_string()).unwrap_or_else(|| "synthetic".into()));
    for p in &config.profiles {
        line("profile", p.to_string().trim_end().replace('\n', " "));
    }
    let obs: Vec<CalibrationObservation> =
        PUBLISHED_WIFI_TIMES.iter().map(|&(size, seconds)| CalibrationObservation { size, seconds }).collect();
    match calibrate(&obs) {
        Ok(c) => line(
            "wifi_fit",
            format!(
                "latency={:.4} bandwidth={:.1} mean_abs_error={:.4}",
                c.profile.latency, c.profile.bandwidth, c.mean_abs_error
            ),
        ),
        Err(e) => line("wifi_fit", format!("failed: {e}")),
    }
    out
}

/// Runs a suite and writes its tables plus `meta.txt` into `out_dir`.
pub fn run_suite(config: &BenchConfig, suite: Suite) -> Result<Vec<PathBuf>, BenchError> {
    config.validate()?;
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    if matches!(suite, Suite::Video | Suite::All) {
        let (t1, t2) = bench_video(config)?;
        written.push(t1.write(dir)?);
        written.push(t2.write(dir)?);
    }
    if matches!(suite, Suite::Image | Suite::All) {
        written.push(bench_image(config)?.write(dir)?);
    }
    if matches!(suite, Suite::Aggregation | Suite::All) {
        written.push(bench_aggregation(config)?.write(dir)?);
    }
    let meta_path = dir.join("meta.txt");
    fs::write(&meta_path, meta(config)).map_err(io(&meta_path))?;
    written.push(meta_path);
    Ok(written)
}
