use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hivekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hivekit")).args(args).output().expect("binary runs")
}

fn ppm(path: &Path, w: usize, h: usize) {
    let mut bytes = format!("P6\n{w} {h}\n255\n").into_bytes();
    for y in 0..h {
        for x in 0..w {
            bytes.extend_from_slice(&[(x * 9) as u8, (y * 7) as u8, ((x + y) * 3) as u8]);
        }
    }
    fs::write(path, bytes).unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn image_round_trip_keeps_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let (src, hvi, back) = (dir.path().join("in.ppm"), dir.path().join("out.hvi"), dir.path().join("back.ppm"));
    ppm(&src, 21, 13);
    let enc = hivekit(&["encode-image", s(&src), "--quality", "75", "--out", s(&hvi)]);
    assert!(enc.status.success(), "{}", String::from_utf8_lossy(&enc.stderr));
    assert_eq!(&fs::read(&hvi).unwrap()[..4], b"HVI1");
    let dec = hivekit(&["decode-image", s(&hvi), "--out", s(&back)]);
    assert!(dec.status.success());
    assert!(fs::read(&back).unwrap().starts_with(b"P6\n21 13\n255\n"));
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--size", "1000000", "--profile", "wifi", "--seed", "7"];
    let (a, b) = (hivekit(&args), hivekit(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("size,elapsed,chunks,retransmissions,outcome,seed\n1000000,"));
}

#[test]
fn custom_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("slow.profile");
    fs::write(&p, "name=slow\nbandwidth=1000\nlatency=0.5\nchunk=100\nloss=0\ntimeout=2\nretries=1\n").unwrap();
    let out = hivekit(&["simulate", "--size", "1000", "--profile", s(&p)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("\n1000,1.5"));
}

#[test]
fn bench_image_emits_quality_columns() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    ppm(&corpus.join("a.ppm"), 40, 30);
    let outdir = dir.path().join("tables");
    let out = hivekit(&[
        "bench", "--suite", "image", "--qualities", "10,50,90", "--runs", "1", "--corpus", s(&corpus), "--out", s(&outdir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(outdir.join("table3.csv")).unwrap();
    let header = table.lines().next().unwrap();
    for q in [10, 50, 90] {
        assert!(header.contains(&format!("q{q}_size")) && header.contains(&format!("q{q}_ratio")));
    }
    assert_eq!(table.lines().count(), 2);
    assert!(fs::read_to_string(outdir.join("meta.txt")).unwrap().contains("seed: 0"));
}

#[test]
fn video_pipeline_through_frame_dirs() {
    let dir = tempfile::tempdir().unwrap();
    let (frames, hvv, back) = (dir.path().join("frames"), dir.path().join("v.hvv"), dir.path().join("back"));
    let gen = hivekit(&["gen-scene", "--width", "32", "--height", "32", "--frames", "5", "--out", s(&frames)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    assert!(frames.join("frame_000004.ppm").exists());
    assert!(hivekit(&["encode-video", s(&frames), "--gop", "4", "--out", s(&hvv)]).status.success());
    assert!(hivekit(&["decode-video", s(&hvv), "--out", s(&back)]).status.success());
    assert_eq!(fs::read_dir(&back).unwrap().count(), 5);
}

#[test]
fn aggregate_writes_flushed_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let mut text = String::from("timestamp,temperature,humidity,co2,weight,vibration\n");
    for i in 0..30 {
        text.push_str(&format!("2024-05-01T12:{i:02}:00Z,21.5,60.0,420,40.25,0.10\n"));
    }
    fs::write(&csv, text).unwrap();
    let outdir = dir.path().join("flushed");
    let out = hivekit(&["aggregate", s(&csv), "--threshold", "500", "--out", s(&outdir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_dir(&outdir).unwrap().count() >= 2);

    let linked = hivekit(&["aggregate", s(&csv), "--threshold", "500", "--seed", "3"]);
    assert!(linked.status.success());
    assert!(String::from_utf8(linked.stdout).unwrap().lines().count() >= 3);
}

#[test]
fn exit_codes() {
    assert_eq!(hivekit(&["--bogus"]).status.code(), Some(1));
    assert_eq!(hivekit(&["encode-image", "x.ppm", "--quality", "0"]).status.code(), Some(1));
    assert_eq!(hivekit(&["--help"]).status.code(), Some(0));
    let missing = hivekit(&["decode-image", "/no/such/file.hvi"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(missing.stdout.is_empty());
    assert!(!missing.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.hvi");
    fs::write(&junk, b"HVI1garbage").unwrap();
    assert_eq!(hivekit(&["decode-image", s(&junk)]).status.code(), Some(2));
}
