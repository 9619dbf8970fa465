//! Seeded procedural stand-ins for hive camera footage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::RgbImage;
use crate::video::{FrameRate, FrameSequence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Static,
    /// Whole-frame translation by `(dx, dy)` pixels per frame.
    Drift { dx: i32, dy: i32 },
    /// Brightness oscillation of ± `amplitude` levels over a 16-frame period.
    Flicker { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub frame_rate: FrameRate,
    pub motion: Motion,
    pub seed: u64,
}

impl SyntheticScene {
    /// An 8 fps scene; panics if either dimension is below 16.
    pub fn new(width: usize, height: usize, frames: usize, motion: Motion, seed: u64) -> Self {
        assert!(width >= 16 && height >= 16, "scene dimensions must be at least 16");
        Self { width, height, frames, frame_rate: FrameRate::fps(8).unwrap(), motion, seed }
    }
}

struct ValueNoise {
    cell: usize,
    cols: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(width: usize, height: usize, cell: usize, rng: &mut ChaCha8Rng) -> Self {
        let cols = width / cell + 2;
        let rows = height / cell + 2;
        Self { cell, cols, lattice: (0..cols * rows).map(|_| rng.random::<f64>()).collect() }
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (cx, cy) = (x / self.cell, y / self.cell);
        let tx = smooth((x % self.cell) as f64 / self.cell as f64);
        let ty = smooth((y % self.cell) as f64 / self.cell as f64);
        let v = |i: usize, j: usize| self.lattice[j * self.cols + i];
        let top = v(cx, cy) * (1.0 - tx) + v(cx + 1, cy) * tx;
        let bottom = v(cx, cy + 1) * (1.0 - tx) + v(cx + 1, cy + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

struct Blob {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    cos: f64,
    sin: f64,
}

/// Smooth multi-octave texture in warm tones with dark elliptical blobs and
/// mild per-pixel grain. Samples stay well inside `0..=255`.
pub fn base_texture(width: usize, height: usize, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let octaves = [(64, 0.6), (16, 0.3), (4, 0.1)].map(|(cell, w)| (ValueNoise::new(width, height, cell, &mut rng), w));
    let blobs: Vec<Blob> = (0..(width * height / 12_000).max(2))
        .map(|_| {
            let angle = rng.random::<f64>() * std::f64::consts::PI;
            Blob {
                cx: rng.random::<f64>() * width as f64,
                cy: rng.random::<f64>() * height as f64,
                rx: rng.random_range(6.0..14.0),
                ry: rng.random_range(3.0..6.0),
                cos: angle.cos(),
                sin: angle.sin(),
            }
        })
        .collect();

    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        for x in 0..width {
            let n: f64 = octaves.iter().map(|(o, w)| o.at(x, y) * w).sum();
            let mut l = 45.0 + 150.0 * n;
            for b in &blobs {
                let (dx, dy) = (x as f64 - b.cx, y as f64 - b.cy);
                let u = (dx * b.cos + dy * b.sin) / b.rx;
                let v = (dy * b.cos - dx * b.sin) / b.ry;
                let d = u * u + v * v;
                if d < 1.0 {
                    l *= 0.4 + 0.6 * d;
                }
            }
            let grain = rng.random_range(-3.0..=3.0);
            let ch = |scale: f64, offset: f64| (l * scale + offset + grain).round().clamp(0.0, 255.0) as u8;
            data.extend_from_slice(&[ch(1.0, 22.0), ch(0.82, 14.0), ch(0.5, 8.0)]);
        }
    }
    RgbImage::new(width, height, data)
}

fn frame(base: &RgbImage, motion: Motion, k: usize) -> RgbImage {
    let (w, h) = base.dims();
    match motion {
        Motion::Static => base.clone(),
        Motion::Drift { dx, dy } => RgbImage::from_fn(w, h, |x, y| {
            let sx = (x as i64 - k as i64 * dx as i64).clamp(0, w as i64 - 1) as usize;
            let sy = (y as i64 - k as i64 * dy as i64).clamp(0, h as i64 - 1) as usize;
            base.pixel(sx, sy)
        }),
        Motion::Flicker { amplitude } => {
            let offset = amplitude * (2.0 * std::f64::consts::PI * k as f64 / 16.0).sin();
            let data = base.as_bytes().iter().map(|&v| (v as f64 + offset).round().clamp(0.0, 255.0) as u8).collect();
            RgbImage::new(w, h, data)
        }
    }
}

pub fn generate_scene(s: &SyntheticScene) -> FrameSequence {
    let base = base_texture(s.width, s.height, s.seed);
    let frames = (0..s.frames.max(1)).map(|k| frame(&base, s.motion, k)).collect();
    FrameSequence::new(s.frame_rate, frames).expect("uniform synthetic frames")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_frames_are_identical() {
        let seq = generate_scene(&SyntheticScene::new(48, 32, 10, Motion::Static, 3));
        assert_eq!(seq.len(), 10);
        assert!(seq.frames().iter().all(|f| f == &seq.frames()[0]));
    }

    #[test]
    fn drift_translates_interior() {
        let seq = generate_scene(&SyntheticScene::new(64, 40, 4, Motion::Drift { dx: 1, dy: 0 }, 9));
        let f0 = &seq.frames()[0];
        for (k, f) in seq.frames().iter().enumerate() {
            for y in 0..40 {
                for x in k..64 {
                    assert_eq!(f.pixel(x, y), f0.pixel(x - k, y));
                }
            }
        }
    }

    #[test]
    fn seeded_and_deterministic() {
        let s = SyntheticScene::new(32, 32, 3, Motion::Flicker { amplitude: 6.0 }, 42);
        assert_eq!(generate_scene(&s), generate_scene(&s));
        assert_ne!(base_texture(32, 32, 1), base_texture(32, 32, 2));
    }

    #[test]
    fn texture_has_headroom() {
        let img = base_texture(200, 150, 5);
        let (lo, hi) = img.as_bytes().iter().fold((255u8, 0u8), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(lo >= 3 && hi <= 240, "range {lo}..{hi}");
    }
}
