//! Zigzag ordering and run-length coding of quantized blocks.

use super::CodecError;

/// `ZIGZAG[i]` is the row-major index of the `i`-th coefficient in scan order.
#[rustfmt::skip]
pub const ZIGZAG: [usize; 64] = [
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
];

pub fn zigzag<T: Copy>(grid: &[T; 64]) -> [T; 64] {
    std::array::from_fn(|i| grid[ZIGZAG[i]])
}

pub fn inverse_zigzag<T: Copy + Default>(scan: &[T; 64]) -> [T; 64] {
    let mut grid = [T::default(); 64];
    for (i, &pos) in ZIGZAG.iter().enumerate() {
        grid[pos] = scan[i];
    }
    grid
}

/// One AC run-length symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcSymbol {
    /// `zeros` zero coefficients (0..=15) followed by nonzero `value`.
    Run { zeros: u8, value: i32 },
    /// Sixteen zeros with more nonzero coefficients still to come.
    ZeroRun16,
    /// Every remaining coefficient is zero.
    EndOfBlock,
}

/// A block's symbols: the DC term (already predicted) and its AC run list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockSymbols {
    pub dc: i32,
    pub ac: Vec<AcSymbol>,
}

/// Codes a zigzag-ordered block. `previous_dc` is subtracted from the DC term;
/// pass 0 for the first block of a plane or for non-predicted DC.
pub fn rle_encode(scan: &[i32; 64], previous_dc: i32) -> BlockSymbols {
    let mut ac = Vec::new();
    let last = scan[1..].iter().rposition(|&v| v != 0).map(|p| p + 1);
    if let Some(last) = last {
        let mut zeros = 0u8;
        for &v in &scan[1..=last] {
            if v == 0 {
                zeros += 1;
                continue;
            }
            while zeros > 15 {
                ac.push(AcSymbol::ZeroRun16);
                zeros -= 16;
            }
            ac.push(AcSymbol::Run { zeros, value: v });
            zeros = 0;
        }
    }
    if last != Some(63) {
        ac.push(AcSymbol::EndOfBlock);
    }
    BlockSymbols { dc: scan[0] - previous_dc, ac }
}

/// Exact inverse of [`rle_encode`].
pub fn rle_decode(symbols: &BlockSymbols, previous_dc: i32) -> Result<[i32; 64], CodecError> {
    let mut scan = [0i32; 64];
    scan[0] = symbols.dc + previous_dc;
    let mut pos = 1usize;
    let mut iter = symbols.ac.iter();
    while pos < 64 {
        match iter.next() {
            None => return Err(CodecError::MissingEndOfBlock),
            Some(AcSymbol::EndOfBlock) => {
                pos = 64;
                break;
            }
            Some(AcSymbol::ZeroRun16) => {
                pos += 16;
                if pos >= 64 {
                    return Err(CodecError::RunOverflow);
                }
            }
            Some(&AcSymbol::Run { zeros, value }) => {
                if zeros > 15 || value == 0 {
                    return Err(CodecError::InvalidRun);
                }
                pos += zeros as usize;
                if pos >= 64 {
                    return Err(CodecError::RunOverflow);
                }
                scan[pos] = value;
                pos += 1;
            }
        }
    }
    debug_assert_eq!(pos, 64);
    if iter.next().is_some() {
        return Err(CodecError::RunOverflow);
    }
    Ok(scan)
}
