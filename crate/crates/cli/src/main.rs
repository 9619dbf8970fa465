use std::error::Error;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hivekit::aggregate::{
    aggregate_window, parse_csv, Aggregator, DirectorySink, FlushPolicy, LinkSink, Sink, WindowStat, DEFAULT_THRESHOLD,
};
use hivekit::bench::{generate_scene, run_suite, BenchConfig, Motion, Suite, SyntheticScene};
use hivekit::codec::{Quality, Subsampling};
use hivekit::image::{decode_image_bytes, encode_image, read_ppm, write_ppm};
use hivekit::link::{simulate_transfer, LinkProfile, TransferReport};
use hivekit::video::{
    decode_video_bytes, encode_video, read_frame_dir, read_raw_frames, write_frame_dir, FrameRate, FrameSequence,
    VideoParams,
};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

/// Image/video codec, sensor aggregation and link simulation toolkit.
#[derive(Parser)]
#[command(name = "hivekit", version, about)]
struct Cli {
    /// Codec quality, 1..=100.
    #[arg(long, global = true, default_value_t = 75, value_parser = clap::value_parser!(u8).range(1..=100))]
    quality: u8,
    /// Frames per group of pictures.
    #[arg(long, global = true, default_value_t = 16, value_parser = clap::value_parser!(u16).range(1..))]
    gop: u16,
    /// Motion search range in pixels.
    #[arg(long, global = true, default_value_t = 7, value_parser = clap::value_parser!(u8).range(0..=127))]
    range: u8,
    /// Link profile: `wifi`, `gsm` or a key=value profile file.
    #[arg(long, global = true, default_value = "wifi")]
    profile: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file or directory; standard output when omitted and the
    /// command writes a single stream.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Chroma {
    #[value(name = "420")]
    S420,
    #[value(name = "444")]
    S444,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Image,
    Video,
    Aggregation,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum MotionArg {
    Static,
    Drift,
    Flicker,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    Sum,
    Average,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a P6 image into an .hvi file.
    EncodeImage {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "420")]
        subsampling: Chroma,
    },
    /// Decode an .hvi file to P6.
    DecodeImage { input: PathBuf },
    /// Compress a frame directory or raw RGB stream into an .hvv file.
    EncodeVideo {
        /// Directory of frame_%06d.ppm files, or a raw interleaved RGB file.
        input: PathBuf,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
        fps: u32,
    },
    /// Decode an .hvv file into a frame directory (or a raw stream with --raw).
    DecodeVideo {
        input: PathBuf,
        #[arg(long)]
        raw: bool,
    },
    /// Feed sensor CSV rows through the threshold aggregator.
    Aggregate {
        /// CSV file with a header row, or `-` for standard input.
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD, value_parser = clap::value_parser!(u64).range(1..))]
        threshold: u64,
        #[arg(long, default_value = "hive")]
        name: String,
        /// Reduce each run of this many rows to one before buffering.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        window: Option<u64>,
        #[arg(long, value_enum, default_value = "average")]
        stat: StatArg,
    },
    /// Simulate one transfer and print its report.
    Simulate {
        #[arg(long)]
        size: u64,
    },
    /// Run benchmark suites and write table CSVs plus meta.txt.
    Bench {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        /// Comma-separated qualities; defaults to --quality.
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=100))]
        qualities: Vec<u8>,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Generate a synthetic scene as frame_%06d.ppm files.
    GenScene {
        #[arg(long, default_value_t = 320, value_parser = clap::value_parser!(u64).range(16..=65535))]
        width: u64,
        #[arg(long, default_value_t = 240, value_parser = clap::value_parser!(u64).range(16..=65535))]
        height: u64,
        #[arg(long, default_value_t = 40)]
        frames: usize,
        #[arg(long, value_enum, default_value = "drift")]
        motion: MotionArg,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        dx: i32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        dy: i32,
        #[arg(long, default_value_t = 10.0)]
        amplitude: f64,
        #[arg(long)]
        raw: bool,
    },
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display()).into()),
        None => Ok(io::stdout().lock().write_all(bytes)?),
    }
}

fn require_out(out: Option<&Path>, what: &str) -> Result<PathBuf> {
    out.map(Path::to_path_buf).ok_or_else(|| format!("--out <DIR> is required to write {what}").into())
}

fn profile(arg: &str) -> Result<LinkProfile> {
    if let Some(p) = LinkProfile::builtin(arg) {
        return Ok(p);
    }
    let text = fs::read_to_string(arg).map_err(|e| format!("profile '{arg}' is not built in and cannot be read: {e}"))?;
    Ok(LinkProfile::parse(&text)?)
}

fn quality(level: u8) -> Quality {
    Quality::new(level).expect("range-checked by the parser")
}

fn load_frames(input: &Path, width: Option<usize>, height: Option<usize>, fps: u32) -> Result<FrameSequence> {
    let rate = FrameRate::fps(fps).expect("range-checked by the parser");
    if input.is_dir() {
        return Ok(read_frame_dir(input, rate)?);
    }
    match (width, height) {
        (Some(w), Some(h)) => Ok(read_raw_frames(&read_input(input)?, w, h, rate)?),
        _ => Err("raw input needs --width and --height".into()),
    }
}

fn raw_stream(seq: &FrameSequence) -> Vec<u8> {
    seq.frames().iter().flat_map(|f| f.as_bytes().iter().copied()).collect()
}

struct Reporting<S>(S);

impl<S: Sink> Sink for Reporting<S> {
    fn id(&self) -> String {
        self.0.id()
    }

    fn send(&mut self, name: &str, octets: &[u8]) -> std::result::Result<Option<TransferReport>, String> {
        let report = self.0.send(name, octets)?;
        if let Some(r) = &report {
            println!("{}", r.csv_row());
        }
        Ok(report)
    }
}

fn aggregate<S: Sink>(rows: Vec<hivekit::aggregate::SensorRow>, name: &str, policy: FlushPolicy, sink: S) -> Result<()> {
    let mut agg = Aggregator::new(name, policy, sink);
    let mut flushes = 0;
    for row in rows {
        if agg.push(row)?.is_some() {
            flushes += 1;
        }
    }
    eprintln!(
        "{flushes} flush(es) to {}; {} row(s), {} octets still buffered",
        agg.sink.id(),
        agg.buffer.rows().len(),
        agg.buffer.byte_size()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::EncodeImage { input, subsampling } => {
            let img = read_ppm(&read_input(&input)?)?;
            let mode = match subsampling {
                Chroma::S420 => Subsampling::S420,
                Chroma::S444 => Subsampling::S444,
            };
            emit(out, &encode_image(&img, quality(cli.quality), mode)?.to_bytes())
        }
        Command::DecodeImage { input } => emit(out, &write_ppm(&decode_image_bytes(&read_input(&input)?)?)),
        Command::EncodeVideo { input, width, height, fps } => {
            let seq = load_frames(&input, width, height, fps)?;
            let params = VideoParams::new(quality(cli.quality), cli.gop, cli.range)?;
            emit(out, &encode_video(&seq, params)?.to_bytes())
        }
        Command::DecodeVideo { input, raw } => {
            let seq = decode_video_bytes(&read_input(&input)?)?;
            if raw {
                emit(out, &raw_stream(&seq))
            } else {
                Ok(write_frame_dir(&seq, &require_out(out, "decoded frames")?)?)
            }
        }
        Command::Aggregate { input, threshold, name, window, stat } => {
            let mut rows = parse_csv(&read_input(&input)?)?;
            if let Some(w) = window {
                let stat = match stat {
                    StatArg::Sum => WindowStat::Sum,
                    StatArg::Average => WindowStat::Average,
                };
                rows = aggregate_window(&rows, stat, w as usize)?;
            }
            let policy = FlushPolicy::new(threshold)?;
            match out {
                Some(dir) => aggregate(rows, &name, policy, DirectorySink::new(dir)?),
                None => {
                    println!("{}", TransferReport::CSV_HEADER);
                    aggregate(rows, &name, policy, Reporting(LinkSink::new(profile(&cli.profile)?, cli.seed)))
                }
            }
        }
        Command::Simulate { size } => {
            let r = simulate_transfer(size, &profile(&cli.profile)?, cli.seed);
            emit(out, format!("{}\n{}\n", TransferReport::CSV_HEADER, r.csv_row()).as_bytes())
        }
        Command::Bench { suite, qualities, runs, corpus } => {
            let mut profiles = vec![profile(&cli.profile)?];
            for builtin in ["wifi", "gsm"] {
                if profiles.iter().all(|p| p.name != builtin) {
                    profiles.push(LinkProfile::builtin(builtin).unwrap());
                }
            }
            let qualities = if qualities.is_empty() { vec![cli.quality] } else { qualities };
            let config = BenchConfig {
                corpus,
                qualities: qualities.into_iter().map(quality).collect(),
                profiles,
                runs: runs as usize,
                out_dir: out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("bench-out")),
                seed: cli.seed,
                video: VideoParams::new(quality(cli.quality), cli.gop, cli.range)?,
                ..BenchConfig::default()
            };
            let suite = match suite {
                SuiteArg::Image => Suite::Image,
                SuiteArg::Video => Suite::Video,
                SuiteArg::Aggregation => Suite::Aggregation,
                SuiteArg::All => Suite::All,
            };
            for path in run_suite(&config, suite)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::GenScene { width, height, frames, motion, dx, dy, amplitude, raw } => {
            let motion = match motion {
                MotionArg::Static => Motion::Static,
                MotionArg::Drift => Motion::Drift { dx, dy },
                MotionArg::Flicker => Motion::Flicker { amplitude },
            };
            let seq = generate_scene(&SyntheticScene::new(width as usize, height as usize, frames, motion, cli.seed));
            if raw {
                emit(out, &raw_stream(&seq))
            } else {
                Ok(write_frame_dir(&seq, &require_out(out, "scene frames")?)?)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
