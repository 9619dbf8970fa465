//! Still-image pipeline and the `HVI1` container.
//!
//! Encoding runs color conversion, chroma subsampling, 8×8 tiling with a
//! −128 level shift, the DCT, quality-scaled quantization, zigzag ordering,
//! differential DC plus run-length coding, and finally Huffman coding with
//! tables built from the image's own symbol statistics.
//!
//! Container layout (all multi-octet integers big-endian):
//!
//! | field               | size                         |
//! |---------------------|------------------------------|
//! | magic `HVI1`        | 4                            |
//! | width, height       | 2 + 2                        |
//! | quality             | 1                            |
//! | subsampling         | 1 (0 = 4:4:4, 1 = 4:2:0)     |
//! | Huffman tables      | luma DC, luma AC, chroma DC, chroma AC; each a u16 count then (symbol, length) pairs |
//! | quant matrices      | luma, chroma; 64 octets each in zigzag order |
//! | payload             | rest of file, MSB-first bits, 1-padded |
//!
//! Blocks are stored plane by plane (Y, then Cb, then Cr), each plane in
//! raster block order, with the DC predictor reset to zero at each plane.

pub mod ppm;

use thiserror::Error;

use crate::codec::bits::{BitReader, BitWriter};
use crate::codec::entropy::{read_block, write_block, SymbolCounts};
use crate::codec::plane::{block_grid, untile_blocks};
use crate::codec::{
    forward_block, inverse_block, rgb_to_ycbcr, rle_decode, rle_encode, subsample_chroma,
    tile_blocks, ycbcr_to_rgb, BlockSymbols, CodecError, HuffmanError, HuffmanTable, Plane,
    QuantMatrix, Quality, Subsampling,
};
use crate::raster::RgbImage;

pub use ppm::{read_ppm, write_ppm, PpmError};

pub const IMAGE_MAGIC: [u8; 4] = *b"HVI1";
pub const MAX_DIMENSION: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("image has a zero dimension")]
    ZeroDimension,
    #[error("image is {width}x{height}; dimensions are limited to 65535")]
    TooLarge { width: usize, height: usize },
    #[error("bad magic: not an HVI1 container")]
    BadMagic,
    #[error("container truncated")]
    Truncated,
    #[error("invalid header: {0}")]
    InvalidHeader(&'static str),
    #[error("undecodable payload: {0}")]
    Undecodable(CodecError),
}

impl From<CodecError> for ImageError {
    fn from(e: CodecError) -> Self {
        if e.is_truncation() {
            ImageError::Truncated
        } else {
            ImageError::Undecodable(e)
        }
    }
}

impl From<HuffmanError> for ImageError {
    fn from(e: HuffmanError) -> Self {
        match e {
            HuffmanError::Truncated => ImageError::Truncated,
            HuffmanError::InvalidTable(why) => ImageError::InvalidHeader(why),
            other => ImageError::Undecodable(other.into()),
        }
    }
}

/// Y, Cb and Cr planes of one picture; chroma may be subsampled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarImage {
    pub width: usize,
    pub height: usize,
    pub subsampling: Subsampling,
    pub y: Plane,
    pub cb: Plane,
    pub cr: Plane,
}

impl PlanarImage {
    pub fn from_rgb(img: &RgbImage, subsampling: Subsampling) -> Self {
        let (w, h) = img.dims();
        let n = w * h;
        let (mut y, mut cb, mut cr) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for px in img.as_bytes().chunks_exact(3) {
            let (ly, lb, lr) = rgb_to_ycbcr(crate::codec::Pixel::new(px[0], px[1], px[2]));
            y.push(ly);
            cb.push(lb);
            cr.push(lr);
        }
        Self {
            width: w,
            height: h,
            subsampling,
            y: Plane::new(w, h, y),
            cb: subsample_chroma(&Plane::new(w, h, cb), subsampling),
            cr: subsample_chroma(&Plane::new(w, h, cr), subsampling),
        }
    }

    pub fn to_rgb(&self) -> RgbImage {
        let (w, h) = (self.width, self.height);
        let (cb, cr) = match self.subsampling {
            Subsampling::S444 => (self.cb.clone(), self.cr.clone()),
            Subsampling::S420 => (self.cb.upsample_to(w, h), self.cr.upsample_to(w, h)),
        };
        let mut data = Vec::with_capacity(w * h * 3);
        for i in 0..w * h {
            let p = ycbcr_to_rgb(self.y.samples()[i], cb.samples()[i], cr.samples()[i]);
            data.extend_from_slice(&[p.r, p.g, p.b]);
        }
        RgbImage::new(w, h, data)
    }

    fn planes(&self) -> [&Plane; 3] {
        [&self.y, &self.cb, &self.cr]
    }
}

/// Everything a decoder needs besides the payload bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageHeader {
    pub width: u16,
    pub height: u16,
    pub quality: Quality,
    pub subsampling: Subsampling,
    pub luma_dc: HuffmanTable,
    pub luma_ac: HuffmanTable,
    pub chroma_dc: HuffmanTable,
    pub chroma_ac: HuffmanTable,
    pub luma_quant: QuantMatrix,
    pub chroma_quant: QuantMatrix,
}

impl ImageHeader {
    fn block_counts(&self) -> [usize; 3] {
        let (w, h) = (self.width as usize, self.height as usize);
        let (cw, ch) = self.subsampling.chroma_dims(w, h);
        let (lx, ly) = block_grid(w, h);
        let (cx, cy) = block_grid(cw, ch);
        [lx * ly, cx * cy, cx * cy]
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&IMAGE_MAGIC);
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&self.height.to_be_bytes());
        out.push(self.quality.level());
        out.push(self.subsampling.code());
        for t in [&self.luma_dc, &self.luma_ac, &self.chroma_dc, &self.chroma_ac] {
            t.write_to(out);
        }
        for m in [&self.luma_quant, &self.chroma_quant] {
            out.extend(crate::codec::zigzag(m.entries()));
        }
    }

    /// Parses a header, returning it and the offset of the payload.
    pub fn read_from(bytes: &[u8]) -> Result<(Self, usize), ImageError> {
        if bytes.len() < 4 {
            return Err(if IMAGE_MAGIC.starts_with(bytes) { ImageError::Truncated } else { ImageError::BadMagic });
        }
        if bytes[..4] != IMAGE_MAGIC {
            return Err(ImageError::BadMagic);
        }
        let fixed = bytes.get(4..10).ok_or(ImageError::Truncated)?;
        let width = u16::from_be_bytes([fixed[0], fixed[1]]);
        let height = u16::from_be_bytes([fixed[2], fixed[3]]);
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidHeader("zero dimension"));
        }
        let quality = Quality::new(fixed[4]).ok_or(ImageError::InvalidHeader("quality out of range"))?;
        let subsampling =
            Subsampling::from_code(fixed[5]).ok_or(ImageError::InvalidHeader("unknown subsampling mode"))?;

        let mut pos = 10;
        let mut tables = Vec::with_capacity(4);
        for _ in 0..4 {
            let (t, used) = HuffmanTable::read_from(&bytes[pos..])?;
            tables.push(t);
            pos += used;
        }
        let mut mats = Vec::with_capacity(2);
        for _ in 0..2 {
            let raw: [u8; 64] = bytes
                .get(pos..pos + 64)
                .ok_or(ImageError::Truncated)?
                .try_into()
                .unwrap();
            let m = QuantMatrix::new(crate::codec::inverse_zigzag(&raw))
                .ok_or(ImageError::InvalidHeader("zero quantizer entry"))?;
            mats.push(m);
            pos += 64;
        }
        let mut tables = tables.into_iter();
        let header = ImageHeader {
            width,
            height,
            quality,
            subsampling,
            luma_dc: tables.next().unwrap(),
            luma_ac: tables.next().unwrap(),
            chroma_dc: tables.next().unwrap(),
            chroma_ac: tables.next().unwrap(),
            luma_quant: mats[0],
            chroma_quant: mats[1],
        };
        Ok((header, pos))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedImage {
    pub header: ImageHeader,
    pub payload: Vec<u8>,
}

impl CompressedImage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.payload.len() + 512);
        self.header.write_to(&mut out);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ImageError> {
        let (header, pos) = ImageHeader::read_from(bytes)?;
        Ok(Self { header, payload: bytes[pos..].to_vec() })
    }

    /// Total serialized size in octets.
    pub fn encoded_len(&self) -> usize {
        let mut head = Vec::new();
        self.header.write_to(&mut head);
        head.len() + self.payload.len()
    }
}

fn check_dims(width: usize, height: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::ZeroDimension);
    }
    if width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(ImageError::TooLarge { width, height });
    }
    Ok(())
}

/// Quantizes every block of a plane and run-length codes it with
/// differential DC.
fn plane_symbols(plane: &Plane, m: &QuantMatrix) -> Vec<BlockSymbols> {
    let mut prev = 0;
    tile_blocks(plane)
        .iter()
        .map(|b| {
            let scan = forward_block(b, m);
            let s = rle_encode(&scan, prev);
            prev = scan[0];
            s
        })
        .collect()
}

pub fn encode_planar(img: &PlanarImage, q: Quality) -> Result<CompressedImage, ImageError> {
    check_dims(img.width, img.height)?;
    let luma_quant = QuantMatrix::LUMA.scaled(q);
    let chroma_quant = QuantMatrix::CHROMA.scaled(q);

    let [y, cb, cr] = img.planes();
    let y_syms = plane_symbols(y, &luma_quant);
    let cb_syms = plane_symbols(cb, &chroma_quant);
    let cr_syms = plane_symbols(cr, &chroma_quant);

    let mut luma = SymbolCounts::default();
    luma.add_all(&y_syms);
    let mut chroma = SymbolCounts::default();
    chroma.add_all(cb_syms.iter().chain(&cr_syms));
    let (luma_dc, luma_ac) = luma.build_tables()?;
    let (chroma_dc, chroma_ac) = chroma.build_tables()?;

    let mut bits = BitWriter::new();
    for s in &y_syms {
        write_block(&mut bits, s, &luma_dc, &luma_ac)?;
    }
    for s in cb_syms.iter().chain(&cr_syms) {
        write_block(&mut bits, s, &chroma_dc, &chroma_ac)?;
    }

    Ok(CompressedImage {
        header: ImageHeader {
            width: img.width as u16,
            height: img.height as u16,
            quality: q,
            subsampling: img.subsampling,
            luma_dc,
            luma_ac,
            chroma_dc,
            chroma_ac,
            luma_quant,
            chroma_quant,
        },
        payload: bits.finish(),
    })
}

pub fn encode_image(img: &RgbImage, q: Quality, mode: Subsampling) -> Result<CompressedImage, ImageError> {
    check_dims(img.width(), img.height())?;
    encode_planar(&PlanarImage::from_rgb(img, mode), q)
}

pub fn decode_planar(c: &CompressedImage) -> Result<PlanarImage, ImageError> {
    let h = &c.header;
    let (w, ht) = (h.width as usize, h.height as usize);
    let (cw, ch) = h.subsampling.chroma_dims(w, ht);
    let counts = h.block_counts();
    let mut input = BitReader::new(&c.payload);

    let mut decode_plane = |n: usize, pw: usize, ph: usize, dc: &HuffmanTable, ac: &HuffmanTable, m: &QuantMatrix| {
        let mut prev = 0;
        let mut blocks = Vec::with_capacity(n);
        for _ in 0..n {
            let scan = rle_decode(&read_block(&mut input, dc, ac)?, prev)?;
            prev = scan[0];
            blocks.push(inverse_block(&scan, m));
        }
        Ok::<_, ImageError>(untile_blocks(pw, ph, &blocks))
    };

    let y = decode_plane(counts[0], w, ht, &h.luma_dc, &h.luma_ac, &h.luma_quant)?;
    let cb = decode_plane(counts[1], cw, ch, &h.chroma_dc, &h.chroma_ac, &h.chroma_quant)?;
    let cr = decode_plane(counts[2], cw, ch, &h.chroma_dc, &h.chroma_ac, &h.chroma_quant)?;
    Ok(PlanarImage { width: w, height: ht, subsampling: h.subsampling, y, cb, cr })
}

pub fn decode_image(c: &CompressedImage) -> Result<RgbImage, ImageError> {
    Ok(decode_planar(c)?.to_rgb())
}

/// Parses and decodes a serialized container.
pub fn decode_image_bytes(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    decode_image(&CompressedImage::from_bytes(bytes)?)
}
