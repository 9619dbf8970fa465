//! Quality-scaled quantization.

use std::fmt;

use super::plane::Block;

/// Quality level in `1..=100`; higher keeps more detail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quality(u8);

impl Quality {
    pub const DEFAULT: Quality = Quality(75);

    pub fn new(level: u8) -> Option<Self> {
        (1..=100).contains(&level).then_some(Self(level))
    }

    pub fn level(self) -> u8 {
        self.0
    }

    /// Percentage scale applied to the base matrices.
    pub fn scale(self) -> u32 {
        let q = self.0 as u32;
        if q < 50 {
            5000 / q
        } else {
            200 - 2 * q
        }
    }
}

impl Default for Quality {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Row-major 8×8 divisors, each in `1..=255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantMatrix([u8; 64]);

#[rustfmt::skip]
const LUMA_BASE: [u8; 64] = [
    16, 11, 10, 16,  24,  40,  51,  61,
    12, 12, 14, 19,  26,  58,  60,  55,
    14, 13, 16, 24,  40,  57,  69,  56,
    14, 17, 22, 29,  51,  87,  80,  62,
    18, 22, 37, 56,  68, 109, 103,  77,
    24, 35, 55, 64,  81, 104, 113,  92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103,  99,
];

#[rustfmt::skip]
const CHROMA_BASE: [u8; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
];

impl QuantMatrix {
    pub const LUMA: QuantMatrix = QuantMatrix(LUMA_BASE);
    pub const CHROMA: QuantMatrix = QuantMatrix(CHROMA_BASE);

    /// `None` if any entry is zero.
    pub fn new(entries: [u8; 64]) -> Option<Self> {
        entries.iter().all(|&e| e >= 1).then_some(Self(entries))
    }

    pub fn entries(&self) -> &[u8; 64] {
        &self.0
    }

    /// `clamp(⌊(base·scale + 50) / 100⌋, 1, 255)` per entry.
    pub fn scaled(&self, q: Quality) -> QuantMatrix {
        let scale = q.scale();
        QuantMatrix(self.0.map(|b| ((b as u32 * scale + 50) / 100).clamp(1, 255) as u8))
    }
}

pub fn scale_quant_matrix(base: &QuantMatrix, q: Quality) -> QuantMatrix {
    base.scaled(q)
}

/// Divides and rounds half away from zero.
pub fn quantize(b: &Block, m: &QuantMatrix) -> [i32; 64] {
    std::array::from_fn(|i| (b.0[i] / m.0[i] as f64).round() as i32)
}

pub fn dequantize(q: &[i32; 64], m: &QuantMatrix) -> Block {
    Block(std::array::from_fn(|i| (q[i] * m.0[i] as i32) as f64))
}
