//! Maps run-length symbols onto Huffman-coded octets plus raw magnitude bits.
//!
//! A value `v` is sent as its size category `s` (bit length of `|v|`)
//! followed by `s` extra bits: `v` itself when positive, `v + 2^s − 1` when
//! negative. DC symbols are the bare category; AC symbols pack
//! `zeros << 4 | s`, with `0x00` for end-of-block and `0xF0` for the
//! sixteen-zero escape.

use super::bits::{BitReader, BitWriter};
use super::huffman::HuffmanTable;
use super::scan::{AcSymbol, BlockSymbols};
use super::CodecError;

const EOB: u8 = 0x00;
const ZRL: u8 = 0xF0;
const MAX_CATEGORY: u8 = 15;

#[inline]
fn category(v: i32) -> u8 {
    let c = (32 - v.unsigned_abs().leading_zeros()) as u8;
    debug_assert!(c <= MAX_CATEGORY, "coefficient {v} out of codable range");
    c
}

#[inline]
fn extra_bits(v: i32, cat: u8) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v + (1 << cat) - 1) as u32
    }
}

#[inline]
fn from_extra_bits(bits: u32, cat: u8) -> i32 {
    if cat == 0 {
        0
    } else if bits >> (cat - 1) == 1 {
        bits as i32
    } else {
        bits as i32 - (1 << cat) + 1
    }
}

fn ac_code(sym: &AcSymbol) -> u8 {
    match *sym {
        AcSymbol::EndOfBlock => EOB,
        AcSymbol::ZeroRun16 => ZRL,
        AcSymbol::Run { zeros, value } => zeros << 4 | category(value),
    }
}

/// Symbol histograms for one DC/AC table pair.
#[derive(Debug, Clone)]
pub struct SymbolCounts {
    pub dc: [u64; 256],
    pub ac: [u64; 256],
}

impl Default for SymbolCounts {
    fn default() -> Self {
        Self { dc: [0; 256], ac: [0; 256] }
    }
}

impl SymbolCounts {
    pub fn add(&mut self, block: &BlockSymbols) {
        self.dc[category(block.dc) as usize] += 1;
        for s in &block.ac {
            self.ac[ac_code(s) as usize] += 1;
        }
    }

    pub fn add_all<'a>(&mut self, blocks: impl IntoIterator<Item = &'a BlockSymbols>) {
        for b in blocks {
            self.add(b);
        }
    }

    /// Builds the (DC, AC) tables. Fails only if no block was counted.
    pub fn build_tables(&self) -> Result<(HuffmanTable, HuffmanTable), CodecError> {
        Ok((HuffmanTable::from_frequencies(&self.dc)?, HuffmanTable::from_frequencies(&self.ac)?))
    }
}

pub fn write_block(
    out: &mut BitWriter,
    block: &BlockSymbols,
    dc_table: &HuffmanTable,
    ac_table: &HuffmanTable,
) -> Result<(), CodecError> {
    let cat = category(block.dc);
    dc_table.encode_symbol(out, cat)?;
    out.write_bits(extra_bits(block.dc, cat), cat);
    for s in &block.ac {
        ac_table.encode_symbol(out, ac_code(s))?;
        if let AcSymbol::Run { value, .. } = *s {
            let cat = category(value);
            out.write_bits(extra_bits(value, cat), cat);
        }
    }
    Ok(())
}

/// Reads one block's symbols, stopping at end-of-block or after the 63rd AC
/// coefficient.
pub fn read_block(
    input: &mut BitReader<'_>,
    dc_table: &HuffmanTable,
    ac_table: &HuffmanTable,
) -> Result<BlockSymbols, CodecError> {
    let cat = dc_table.decode_symbol(input)?;
    if cat > MAX_CATEGORY {
        return Err(CodecError::InvalidSymbol(cat));
    }
    let dc = from_extra_bits(input.read_bits(cat)?, cat);

    let mut ac = Vec::new();
    let mut pos = 1usize;
    while pos < 64 {
        let code = ac_table.decode_symbol(input)?;
        match code {
            EOB => {
                ac.push(AcSymbol::EndOfBlock);
                break;
            }
            ZRL => {
                ac.push(AcSymbol::ZeroRun16);
                pos += 16;
            }
            _ => {
                let (zeros, cat) = (code >> 4, code & 0x0F);
                if cat == 0 {
                    return Err(CodecError::InvalidSymbol(code));
                }
                let value = from_extra_bits(input.read_bits(cat)?, cat);
                ac.push(AcSymbol::Run { zeros, value });
                pos += zeros as usize + 1;
            }
        }
    }
    if pos > 64 {
        return Err(CodecError::RunOverflow);
    }
    Ok(BlockSymbols { dc, ac })
}
