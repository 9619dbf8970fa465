//! Acceptance gate: ten criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use hivekit::aggregate::{check_and_flush, parse_csv, Aggregator, FlushPolicy, MemorySink, RowBuffer, SensorRow};
use hivekit::bench::{base_texture, bench_aggregation, bzip2_compress, bzip2_version, generate_scene, synthetic_rows, BenchConfig, Motion, SyntheticScene};
use hivekit::codec::bits::{BitReader, BitWriter};
use hivekit::codec::entropy::{read_block, write_block, SymbolCounts};
use hivekit::codec::{fdct, idct, rle_decode, rle_encode, Block, HuffmanTable, Quality, Subsampling};
use hivekit::image::{decode_image, encode_image};
use hivekit::link::{expected_time, simulate_transfer, LinkProfile};
use hivekit::metrics::{acr, bper, percent_decrease, SizePair};
use hivekit::raster::RgbImage;
use hivekit::video::{decode_video_bytes, decode_video_planar, encode_video, encode_video_traced, CompressedVideo, VideoParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(start: Instant, limit: f64, what: &str) -> Result<f64, String> {
    let t = start.elapsed().as_secs_f64();
    ensure(t < limit, format!("{what} took {t:.2} s, limit {limit} s"))?;
    Ok(t)
}

fn random_scan(rng: &mut ChaCha8Rng) -> [i32; 64] {
    let density = rng.random_range(0.0..1.0);
    std::array::from_fn(|_| {
        if rng.random::<f64>() < density {
            let mag = 1i32 << rng.random_range(0..11);
            rng.random_range(-mag..=mag)
        } else {
            0
        }
    })
}

fn c1_entropy() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1);
    let scans: Vec<[i32; 64]> = (0..1000).map(|_| random_scan(&mut rng)).collect();
    let mut prev = 0;
    let symbols: Vec<_> = scans
        .iter()
        .map(|s| {
            let b = rle_encode(s, prev);
            prev = s[0];
            b
        })
        .collect();
    let mut counts = SymbolCounts::default();
    counts.add_all(&symbols);
    let (dc, ac) = counts.build_tables().map_err(|e| e.to_string())?;
    let mut w = BitWriter::new();
    for s in &symbols {
        write_block(&mut w, s, &dc, &ac).map_err(|e| e.to_string())?;
    }
    let bytes = w.finish();
    let mut r = BitReader::new(&bytes);
    let mut prev = 0;
    for (i, s) in scans.iter().enumerate() {
        let back = rle_decode(&read_block(&mut r, &dc, &ac).map_err(|e| e.to_string())?, prev).map_err(|e| e.to_string())?;
        ensure(&back == s, format!("block {i} differs after RLE+Huffman"))?;
        prev = back[0];
    }

    for a in 0..100 {
        let n = rng.random_range(1..=256usize);
        let mut freqs = vec![0u64; 256];
        let mut alphabet = Vec::new();
        for sym in rand::seq::index::sample(&mut rng, 256, n) {
            freqs[sym] = rng.random_range(1..10_000);
            alphabet.push(sym as u8);
        }
        let table = HuffmanTable::from_frequencies(&freqs).map_err(|e| e.to_string())?;
        let msg: Vec<u8> = (0..rng.random_range(0..2000)).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        let enc = table.encode(&msg).map_err(|e| e.to_string())?;
        let dec = table.decode(&enc, msg.len()).map_err(|e| e.to_string())?;
        ensure(dec == msg, format!("alphabet {a}: Huffman round trip differs"))?;
        let mut ser = Vec::new();
        table.write_to(&mut ser);
        let (back, used) = HuffmanTable::read_from(&ser).map_err(|e| e.to_string())?;
        ensure(back == table && used == ser.len(), format!("alphabet {a}: table serialization differs"))?;
    }
    let t = within_time(start, 10.0, "entropy round trips")?;
    Ok(format!("1000 blocks and 100 alphabets exact in {t:.2} s"))
}

/// Direct double sums with the orthonormal DCT-II basis.
fn basis(u: usize, x: usize) -> f64 {
    let c = if u == 0 { (0.5f64).sqrt() } else { 1.0 };
    0.5 * c * ((2 * x + 1) as f64 * u as f64 * PI / 16.0).cos()
}

fn fdct_oracle(b: &Block) -> Block {
    let mut out = Block::ZERO;
    for u in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for x in 0..8 {
                for y in 0..8 {
                    s += basis(u, x) * basis(v, y) * b.0[x * 8 + y];
                }
            }
            out.0[u * 8 + v] = s;
        }
    }
    out
}

fn idct_oracle(c: &Block) -> Block {
    let mut out = Block::ZERO;
    for x in 0..8 {
        for y in 0..8 {
            let mut s = 0.0;
            for u in 0..8 {
                for v in 0..8 {
                    s += basis(u, x) * basis(v, y) * c.0[u * 8 + v];
                }
            }
            out.0[x * 8 + y] = s;
        }
    }
    out
}

fn max_diff(a: &Block, b: &Block) -> f64 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn c2_dct() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let b = Block(std::array::from_fn(|_| rng.random_range(-128.0..128.0)));
        let f = fdct(&b);
        let fe = max_diff(&f, &fdct_oracle(&b));
        let ie = max_diff(&idct(&f), &idct_oracle(&f));
        let re = max_diff(&idct(&f), &b);
        worst = worst.max(fe).max(ie).max(re);
        ensure(fe <= 1e-9 && ie <= 1e-9 && re <= 1e-9, format!("block {i}: fdct {fe:e}, idct {ie:e}, identity {re:e}"))?;
    }
    let t = within_time(start, 5.0, "DCT oracle comparison")?;
    Ok(format!("max abs error {worst:.1e} over 100 blocks in {t:.2} s"))
}

fn c3_metrics() -> Outcome {
    let ratios = [
        ((14_929_920, 9_852_909), 1.52),
        ((14_929_920, 134_101), 111.33),
        ((200_724_480, 1_595_435), 125.81),
        ((10_305_553, 34_236), 301.02),
        ((10_906_757, 605_822), 18.00),
        ((11_809_079, 1_435_811), 8.22),
    ];
    for ((o, c), printed) in ratios {
        let r = acr(&[SizePair::new(o, c).unwrap()]).unwrap();
        ensure((r - printed).abs() <= 0.01, format!("acr({o}, {c}) = {r:.4}, printed {printed}"))?;
    }
    let video = [((6.367, 2.933), 53.85), ((35.733, 21.767), 39.10), ((6.367, 1.567), 75.30), ((35.733, 1.967), 94.48)];
    for ((a, b), printed) in video {
        let p = percent_decrease(a, b).unwrap();
        ensure((p - printed).abs() <= 0.2, format!("percent_decrease({a}, {b}) = {p:.3}, printed {printed}"))?;
    }
    let image = [((3.3, 2.5), 24.0), ((4.9, 4.2), 14.0), ((3.3, 1.533), 53.0), ((4.9, 4.423), 10.0)];
    let mut failures = Vec::new();
    for ((a, b), printed) in image {
        let p = percent_decrease(a, b).unwrap();
        if (p - printed).abs() > 0.5 {
            failures.push(format!("percent_decrease({a}, {b}) = {p:.3}, printed {printed}% (off by {:.3})", (p - printed).abs()));
        }
    }
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok("6 ratios, 4 video and 4 image percentages reproduce".into())
}

fn test_images() -> Vec<RgbImage> {
    [(1024, 1024, 101), (1280, 960, 202), (1200, 1000, 303)].map(|(w, h, s)| base_texture(w, h, s)).to_vec()
}

fn c4_monotonicity(images: &[RgbImage]) -> Outcome {
    let start = Instant::now();
    let qs = [10, 30, 50, 70, 90];
    for (i, img) in images.iter().enumerate() {
        let mut prev: Option<(usize, f64)> = None;
        for q in qs {
            let c = encode_image(img, Quality::new(q).unwrap(), Subsampling::S420).map_err(|e| e.to_string())?;
            let d = decode_image(&c).map_err(|e| e.to_string())?;
            let size = c.encoded_len();
            let e = bper(img.as_bytes(), d.as_bytes()).unwrap();
            if let Some((ps, pe)) = prev {
                ensure(size >= ps, format!("image {i}: size fell from {ps} to {size} at q={q}"))?;
                ensure(e <= pe, format!("image {i}: BPER rose from {pe:.5} to {e:.5} at q={q}"))?;
            }
            prev = Some((size, e));
        }
    }
    let t = within_time(start, 30.0, "quality sweep")?;
    Ok(format!("3 images x 5 qualities, no violations in {t:.2} s"))
}

fn c5_baseline(images: &[RgbImage]) -> Outcome {
    if bzip2_version().is_none() {
        return Ok("SKIPPED: no bzip2 tool on this system".into());
    }
    let mut detail = Vec::new();
    for (i, img) in images.iter().enumerate() {
        ensure(img.width() * img.height() >= 1_000_000, format!("image {i} is below 1 MP"))?;
        let raw = img.as_bytes().len() as f64;
        let ours = raw / encode_image(img, Quality::DEFAULT, Subsampling::S420).unwrap().encoded_len() as f64;
        let theirs = raw / bzip2_compress(img.as_bytes()).map_err(|e| e.to_string())?.len() as f64;
        ensure(ours >= 2.0 * theirs, format!("image {i}: ratio {ours:.2} vs bzip2 {theirs:.2}"))?;
        detail.push(format!("{ours:.1} vs {theirs:.2}"));
    }
    Ok(format!("ratios at q=75: {}", detail.join(", ")))
}

fn c6_video_ratio() -> Outcome {
    let seq = generate_scene(&SyntheticScene::new(320, 240, 40, Motion::Drift { dx: 1, dy: 0 }, 7));
    let start = Instant::now();
    let params = VideoParams::new(Quality::new(75).unwrap(), 16, 7).unwrap();
    let c = encode_video(&seq, params).map_err(|e| e.to_string())?;
    let t = within_time(start, 60.0, "5 s video encode")?;
    let ratio = seq.raw_size() as f64 / c.encoded_len() as f64;
    ensure(ratio >= 50.0, format!("ratio {ratio:.2} below 50"))?;
    Ok(format!("ratio {ratio:.2} ({} -> {} octets) in {t:.2} s", seq.raw_size(), c.encoded_len()))
}

fn c7_closed_loop() -> Outcome {
    let scenes = [
        ("static", Motion::Static),
        ("drift", Motion::Drift { dx: 2, dy: 1 }),
        ("flicker", Motion::Flicker { amplitude: 12.0 }),
    ];
    for (name, motion) in scenes {
        let seq = generate_scene(&SyntheticScene::new(96, 64, 20, motion, 5));
        let (c, recon) = encode_video_traced(&seq, VideoParams::default()).map_err(|e| e.to_string())?;
        let parsed = CompressedVideo::from_bytes(&c.to_bytes()).map_err(|e| e.to_string())?;
        let decoded = decode_video_planar(&parsed).map_err(|e| e.to_string())?;
        ensure(decoded == recon, format!("{name}: decoder output differs from encoder reconstruction"))?;
        if name == "static" {
            let frames = decode_video_bytes(&c.to_bytes()).map_err(|e| e.to_string())?;
            let first = &frames.frames()[0];
            ensure(frames.frames().iter().all(|f| f == first), "static scene frames differ after decoding")?;
        }
    }
    Ok("static, drift and flicker reconstructions bit-exact; static frames identical".into())
}

fn c8_link() -> Outcome {
    let lossless = LinkProfile { loss: 0.0, ..LinkProfile::wifi() };
    for size in [1u64, 1000, 16_384, 1_000_000, 10_000_000] {
        let r = simulate_transfer(size, &lossless, 3);
        let want = lossless.latency + size as f64 / lossless.bandwidth;
        ensure((r.elapsed - want).abs() <= 1e-9 * want, format!("loss-0 size {size}: {} vs {want}", r.elapsed))?;
    }

    let lossy = LinkProfile { loss: 0.1, ..LinkProfile::wifi() };
    let size = 1_000_000u64;
    let mean = (0..10_000u64).map(|s| simulate_transfer(size, &lossy, s).elapsed).sum::<f64>() / 10_000.0;
    let chunks = size.div_ceil(lossy.chunk_size) as f64;
    let oracle = lossy.latency + size as f64 / lossy.bandwidth + chunks * (0.1 / 0.9) * lossy.timeout;
    ensure((expected_time(size, &lossy) - oracle).abs() < 1e-9, "expected_time disagrees with closed form")?;
    let rel = (mean - oracle).abs() / oracle;
    ensure(rel < 0.02, format!("Monte-Carlo mean {mean:.3} vs expected {oracle:.3} ({:.2}%)", rel * 100.0))?;

    let (wifi, gsm) = (LinkProfile::wifi(), LinkProfile::gsm());
    for size in [10_000u64, 100_000, 1_000_000, 10_000_000] {
        let (w, g) = (simulate_transfer(size, &wifi, 11).elapsed, simulate_transfer(size, &gsm, 11).elapsed);
        ensure(w < g, format!("size {size}: wifi {w:.2} s not below gsm {g:.2} s"))?;
        ensure(simulate_transfer(size, &gsm, 11) == simulate_transfer(size, &gsm, 11), "same seed gave different reports")?;
    }
    Ok(format!("loss-0 exact; Monte-Carlo within {:.2}%; wifi < gsm at all sizes; seeded replay identical", rel * 100.0))
}

fn c9_aggregator() -> Outcome {
    let rows = synthetic_rows(2000, 17);
    let threshold = 4096;
    let policy = FlushPolicy::new(threshold).unwrap();
    let mut buffer = RowBuffer::new("hive");
    let mut sink = MemorySink::default();
    let mut flushes = 0;
    for (i, r) in rows.iter().enumerate() {
        let before = buffer.byte_size();
        buffer.append_row(r.clone()).map_err(|e| e.to_string())?;
        let after = buffer.byte_size();
        let flushed = check_and_flush(&mut buffer, &policy, &mut sink).map_err(|e| e.to_string())?;
        ensure(before < threshold, format!("row {i}: store reached the threshold without flushing"))?;
        ensure(flushed.is_some() == (after >= threshold), format!("row {i}: flush decision wrong at {after} octets"))?;
        if let Some(f) = flushed {
            ensure(f.octets == after, "flushed size differs from tracked size")?;
            flushes += 1;
        }
    }
    let mut back: Vec<SensorRow> = Vec::new();
    for (_, bytes) in &sink.files {
        back.extend(parse_csv(bytes).map_err(|e| e.to_string())?);
    }
    back.extend_from_slice(buffer.rows());
    ensure(back == rows, "flushed CSV does not re-parse to the appended rows")?;

    let many = synthetic_rows(100_000, 18);
    let start = Instant::now();
    let mut agg = Aggregator::new("hive", FlushPolicy::default(), MemorySink::default());
    for r in many {
        agg.push(r).map_err(|e| e.to_string())?;
    }
    let t = within_time(start, 2.0, "100000 appends")?;

    let cfg = BenchConfig { row_counts: (1..=10).chain([15, 30, 40, 50, 100]).collect(), ..BenchConfig::default() };
    let table = bench_aggregation(&cfg).map_err(|e| e.to_string())?;
    let avg = table.column("average_s").unwrap();
    let times: Vec<f64> = table.rows.iter().map(|r| r[avg].parse().unwrap()).collect();
    let (lo, hi) = times.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    let spread = (hi - lo) / lo;
    ensure(spread < 0.15, format!("1-100 row transfer times span {lo:.3}-{hi:.3} s ({:.1}%)", spread * 100.0))?;
    Ok(format!(
        "{flushes} flushes exactly at threshold; re-parse exact; 100000 appends in {t:.2} s; 1-100 rows span {:.1}%",
        spread * 100.0
    ))
}

fn c10_timing() -> Outcome {
    let img = base_texture(512, 512, 99);
    let start = Instant::now();
    encode_image(&img, Quality::DEFAULT, Subsampling::S420).map_err(|e| e.to_string())?;
    let ti = within_time(start, 2.0, "512x512 encode")?;
    let seq = generate_scene(&SyntheticScene::new(320, 240, 40, Motion::Drift { dx: 1, dy: 1 }, 3));
    let start = Instant::now();
    encode_video(&seq, VideoParams::default()).map_err(|e| e.to_string())?;
    let tv = within_time(start, 15.0, "40-frame video encode")?;
    Ok(format!("512x512 encode {ti:.3} s; 40-frame 320x240 encode {tv:.2} s"))
}

fn main() -> ExitCode {
    let images = test_images();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("entropy-stage losslessness", Box::new(c1_entropy)),
        ("DCT oracle equivalence", Box::new(c2_dct)),
        ("metric arithmetic vs published values", Box::new(c3_metrics)),
        ("quality monotonicity", Box::new(|| c4_monotonicity(&images))),
        ("baseline dominance on images", Box::new(|| c5_baseline(&images))),
        ("video compression regime", Box::new(c6_video_ratio)),
        ("closed-loop video correctness", Box::new(c7_closed_loop)),
        ("link simulator", Box::new(c8_link)),
        ("aggregator", Box::new(c9_aggregator)),
        ("timing envelope", Box::new(c10_timing)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
