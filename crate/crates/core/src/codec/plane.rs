//! Sample planes, chroma subsampling and 8×8 tiling.

use std::fmt;

/// One 8×8 block of real values, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Block(pub [f64; 64]);

impl Block {
    pub const ZERO: Block = Block([0.0; 64]);

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.0[row * 8 + col]
    }
}

impl Default for Block {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.chunks(8)).finish()
    }
}

/// A single channel of 8-bit samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl Plane {
    /// Panics unless `samples.len() == width * height` and both are nonzero.
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1, "plane dimensions must be positive");
        assert_eq!(samples.len(), width * height, "sample count must match dimensions");
        Self { width, height, samples }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    /// Sample at a possibly out-of-range coordinate, replicating edges.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    /// Nearest-neighbour 2× upsampling, cropped to `width × height`.
    pub fn upsample_to(&self, width: usize, height: usize) -> Plane {
        let mut out = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                out.push(self.get_clamped((x / 2) as isize, (y / 2) as isize));
            }
        }
        Plane::new(width, height, out)
    }
}

/// Chroma resolution relative to luma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Subsampling {
    /// Full-resolution chroma.
    S444,
    /// Chroma halved in both directions.
    #[default]
    S420,
}

impl Subsampling {
    pub fn code(self) -> u8 {
        match self {
            Subsampling::S444 => 0,
            Subsampling::S420 => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Subsampling::S444),
            1 => Some(Subsampling::S420),
            _ => None,
        }
    }

    /// Chroma plane dimensions for a `width × height` image.
    pub fn chroma_dims(self, width: usize, height: usize) -> (usize, usize) {
        match self {
            Subsampling::S444 => (width, height),
            Subsampling::S420 => (width.div_ceil(2), height.div_ceil(2)),
        }
    }
}

/// Reduces a chroma plane. 4:2:0 averages each 2×2 group of the
/// edge-padded plane, rounding half up.
pub fn subsample_chroma(p: &Plane, mode: Subsampling) -> Plane {
    match mode {
        Subsampling::S444 => p.clone(),
        Subsampling::S420 => {
            let (w, h) = mode.chroma_dims(p.width, p.height);
            let mut out = Vec::with_capacity(w * h);
            for y in 0..h {
                for x in 0..w {
                    let (sx, sy) = (2 * x as isize, 2 * y as isize);
                    let sum = p.get_clamped(sx, sy) as u32
                        + p.get_clamped(sx + 1, sy) as u32
                        + p.get_clamped(sx, sy + 1) as u32
                        + p.get_clamped(sx + 1, sy + 1) as u32;
                    out.push(((sum + 2) / 4) as u8);
                }
            }
            Plane::new(w, h, out)
        }
    }
}

/// Number of 8×8 blocks across and down for a `width × height` area.
pub fn block_grid(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(8), height.div_ceil(8))
}

/// Splits an area into 8×8 blocks left-to-right, top-to-bottom, edge-padding
/// by replicating the last row and column. `sample(x, y)` is only called with
/// in-range coordinates.
pub fn tile_with(width: usize, height: usize, sample: impl Fn(usize, usize) -> f64) -> Vec<Block> {
    let (bw, bh) = block_grid(width, height);
    let mut blocks = Vec::with_capacity(bw * bh);
    for by in 0..bh {
        for bx in 0..bw {
            let mut block = Block::ZERO;
            for r in 0..8 {
                let y = (by * 8 + r).min(height - 1);
                for c in 0..8 {
                    let x = (bx * 8 + c).min(width - 1);
                    block.0[r * 8 + c] = sample(x, y);
                }
            }
            blocks.push(block);
        }
    }
    blocks
}

/// Tiles an 8-bit plane and level-shifts samples by −128.
pub fn tile_blocks(p: &Plane) -> Vec<Block> {
    tile_with(p.width, p.height, |x, y| p.get(x, y) as f64 - 128.0)
}

/// Inverse of [`tile_with`]: visits every in-range `(x, y, value)` of the
/// blocks, dropping the padding.
pub fn untile(width: usize, height: usize, blocks: &[Block], mut put: impl FnMut(usize, usize, f64)) {
    let (bw, _) = block_grid(width, height);
    for (i, block) in blocks.iter().enumerate() {
        let (bx, by) = (i % bw, i / bw);
        for r in 0..8 {
            let y = by * 8 + r;
            if y >= height {
                break;
            }
            for c in 0..8 {
                let x = bx * 8 + c;
                if x >= width {
                    break;
                }
                put(x, y, block.0[r * 8 + c]);
            }
        }
    }
}

/// Reassembles level-shifted blocks into an 8-bit plane, rounding and
/// clamping.
pub fn untile_blocks(width: usize, height: usize, blocks: &[Block]) -> Plane {
    let mut out = vec![0u8; width * height];
    untile(width, height, blocks, |x, y, v| {
        out[y * width + x] = (v + 128.0).round().clamp(0.0, 255.0) as u8;
    });
    Plane::new(width, height, out)
}
