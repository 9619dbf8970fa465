//! MSB-first bit packing shared by both container formats.
//!
//! Writers pad the final partial byte with 1-bits. Readers report running off
//! the end as [`BitError::Exhausted`], which callers map onto "truncated".

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("bit stream exhausted")]
    Exhausted,
}

/// Accumulates bits most-significant first.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    filled: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | bit as u8;
        self.filled += 1;
        if self.filled == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.filled = 0;
        }
    }

    /// Writes the low `count` bits of `value`, high bit first. `count` ≤ 32.
    pub fn write_bits(&mut self, value: u32, count: u8) {
        debug_assert!(count <= 32);
        for i in (0..count).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    /// Number of bits written so far, before padding.
    pub fn bit_len(&self) -> usize {
        self.bytes.len() * 8 + self.filled as usize
    }

    /// Pads the trailing partial byte with ones and returns the octets.
    pub fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            let pad = 8 - self.filled;
            let byte = (self.acc << pad) | ((1u8 << pad) - 1);
            self.bytes.push(byte);
        }
        self.bytes
    }
}

/// Reads bits most-significant first from a borrowed octet slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    cursor: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, cursor: 0 }
    }

    /// Position in bits from the start of the slice.
    pub fn position(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() * 8 - self.cursor
    }

    pub fn read_bit(&mut self) -> Result<bool, BitError> {
        let byte = *self.bytes.get(self.cursor / 8).ok_or(BitError::Exhausted)?;
        let bit = (byte >> (7 - (self.cursor % 8))) & 1 == 1;
        self.cursor += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, count: u8) -> Result<u32, BitError> {
        debug_assert!(count <= 32);
        if self.remaining() < count as usize {
            return Err(BitError::Exhausted);
        }
        let mut value = 0u32;
        for _ in 0..count {
            value = (value << 1) | self.read_bit()? as u32;
        }
        Ok(value)
    }
}
