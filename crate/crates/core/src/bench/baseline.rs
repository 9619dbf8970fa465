//! bzip2 reference compressor, reached through the platform's `bzip2` tool.

use std::io::Write;
use std::process::{Command, Stdio};
use std::thread;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("baseline unavailable: {0}")]
    Unavailable(String),
    #[error("bzip2 failed: {0}")]
    Failed(String),
}

const TOOL: &str = "bzip2";

fn run(args: &[&str], input: &[u8]) -> Result<Vec<u8>, BaselineError> {
    let mut child = Command::new(TOOL)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| BaselineError::Unavailable(format!("cannot run {TOOL}: {e}")))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let output = thread::scope(|s| {
        s.spawn(move || stdin.write_all(input));
        child.wait_with_output()
    })
    .map_err(|e| BaselineError::Failed(e.to_string()))?;
    if !output.status.success() {
        return Err(BaselineError::Failed(String::from_utf8_lossy(&output.stderr).trim().to_string()));
    }
    Ok(output.stdout)
}

/// Compresses at block size 9 (900 kB).
pub fn bzip2_compress(input: &[u8]) -> Result<Vec<u8>, BaselineError> {
    run(&["-9", "-c"], input)
}

pub fn bzip2_decompress(input: &[u8]) -> Result<Vec<u8>, BaselineError> {
    run(&["-d", "-c"], input)
}

/// First line of the tool's version banner, or `None` if it cannot be run.
pub fn bzip2_version() -> Option<String> {
    // The banner goes to stderr; `--version` alone exits after printing it.
    let out = Command::new(TOOL).arg("--version").stdin(Stdio::null()).output().ok()?;
    let text = String::from_utf8_lossy(&out.stderr).into_owned() + &String::from_utf8_lossy(&out.stdout);
    text.lines().map(str::trim).find(|l| !l.is_empty()).map(str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn available() -> bool {
        if bzip2_version().is_none() {
            eprintln!("bzip2 tool not found, skipping");
            return false;
        }
        true
    }

    #[test]
    fn round_trips_random_data() {
        if !available() {
            return;
        }
        let mut data = vec![0u8; 50_000];
        ChaCha8Rng::seed_from_u64(1).fill_bytes(&mut data);
        let packed = bzip2_compress(&data).unwrap();
        assert_eq!(packed[..3], *b"BZh");
        assert_eq!(packed[3], b'9');
        assert_eq!(bzip2_decompress(&packed).unwrap(), data);
    }

    #[test]
    fn ratio_extremes() {
        if !available() {
            return;
        }
        let repetitive: Vec<u8> = b"hive,22.5,61.0,410\n".iter().copied().cycle().take(1 << 20).collect();
        assert!(repetitive.len() as f64 / bzip2_compress(&repetitive).unwrap().len() as f64 > 10.0);

        let mut random = vec![0u8; 1 << 20];
        ChaCha8Rng::seed_from_u64(2).fill_bytes(&mut random);
        let ratio = random.len() as f64 / bzip2_compress(&random).unwrap().len() as f64;
        assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn corrupt_input_is_an_error() {
        if !available() {
            return;
        }
        assert!(matches!(bzip2_decompress(b"not bzip2"), Err(BaselineError::Failed(_))));
    }
}
