//! Transform and entropy-coding stages shared by the image and video codecs.

pub mod bits;
pub mod color;
pub mod dct;
pub mod entropy;
pub mod huffman;
pub mod plane;
pub mod quant;
pub mod scan;

use thiserror::Error;

pub use bits::{BitError, BitReader, BitWriter};
pub use color::{rgb_to_ycbcr, ycbcr_to_rgb, Pixel};
pub use dct::{fdct, idct};
pub use huffman::{HuffmanError, HuffmanTable};
pub use plane::{subsample_chroma, tile_blocks, Block, Plane, Subsampling};
pub use quant::{dequantize, quantize, scale_quant_matrix, QuantMatrix, Quality};
pub use scan::{inverse_zigzag, rle_decode, rle_encode, zigzag, AcSymbol, BlockSymbols};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Huffman(#[from] HuffmanError),
    #[error("zero run runs past the end of the block")]
    RunOverflow,
    #[error("block ended without an end-of-block marker")]
    MissingEndOfBlock,
    #[error("run-length symbol out of range")]
    InvalidRun,
    #[error("invalid coefficient symbol {0:#04x}")]
    InvalidSymbol(u8),
    #[error("bit stream ended early")]
    Truncated,
}

impl From<BitError> for CodecError {
    fn from(_: BitError) -> Self {
        CodecError::Truncated
    }
}

impl CodecError {
    /// True when the error means the input ran out rather than being garbled.
    pub fn is_truncation(&self) -> bool {
        matches!(self, CodecError::Truncated | CodecError::Huffman(HuffmanError::Truncated))
    }
}

/// fdct → quantize → zigzag.
pub fn forward_block(b: &Block, m: &QuantMatrix) -> [i32; 64] {
    zigzag(&quantize(&fdct(b), m))
}

/// inverse zigzag → dequantize → idct.
pub fn inverse_block(scan: &[i32; 64], m: &QuantMatrix) -> Block {
    idct(&dequantize(&inverse_zigzag(scan), m))
}
