//! Predictive video codec and the `HVV1` container.
//!
//! Frame `i` is intra-coded when `i % gop == 0`, using the still-image
//! pipeline unchanged at 4:2:0. Every other frame is predicted from the
//! previous *reconstructed* frame: each 16×16 luma macroblock gets an integer
//! motion vector from a full search, and the motion-compensated residual goes
//! through the DCT, quantization, zigzag, run-length and Huffman stages with
//! no level shift and no DC prediction. Encoder and decoder share the
//! reconstruction code, so their frames agree bit for bit.
//!
//! A residual block whose DCT coefficients all lie strictly within one
//! quantizer step of zero is coded as all zeros. Macroblocks whose zero-motion
//! residual is zero in that sense keep the zero vector without a search. On a
//! static scene this makes every inter frame a pure copy of its reference.
//!
//! Container layout (big-endian):
//!
//! | field                   | size |
//! |-------------------------|------|
//! | magic `HVV1`            | 4    |
//! | width, height           | 2 + 2 |
//! | frame rate num, den     | 4 + 4 |
//! | frame count             | 4    |
//! | quality                 | 1    |
//! | GOP length              | 2    |
//! | search range            | 1    |
//!
//! followed by one record per frame: kind (0 intra, 1 inter), payload length
//! (u32), for inter frames one signed `(dx, dy)` octet pair per macroblock in
//! raster order, then the payload. An intra payload is a complete `HVI1`
//! file. An inter payload is the four Huffman tables (luma DC, luma AC,
//! chroma DC, chroma AC) followed by the residual bits, plane by plane.

mod motion;

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::codec::bits::{BitReader, BitWriter};
use crate::codec::entropy::{read_block, write_block, SymbolCounts};
use crate::codec::plane::{block_grid, tile_with, untile};
use crate::codec::{
    fdct, inverse_block, quantize, rle_decode, rle_encode, zigzag, Block, BlockSymbols, CodecError, HuffmanTable,
    Plane, QuantMatrix, Quality, Subsampling,
};
use crate::image::{
    decode_planar, encode_planar, read_ppm, write_ppm, CompressedImage, ImageError, PlanarImage, PpmError,
    MAX_DIMENSION,
};
use crate::raster::RgbImage;

pub use motion::{estimate_motion, macroblock_grid, predict, MotionVector, MACROBLOCK};
use motion::estimate_motion_except;

pub const VIDEO_MAGIC: [u8; 4] = *b"HVV1";
pub const HEADER_LEN: usize = 24;
pub const MAX_RANGE: u8 = 127;

#[derive(Debug, Error)]
pub enum VideoError {
    #[error("frame sequence is empty")]
    Empty,
    #[error("frame {index} is {found:?}, expected {expected:?}")]
    DimensionMismatch { index: usize, expected: (usize, usize), found: (usize, usize) },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not an HVV1 container")]
    BadMagic,
    #[error("container is truncated")]
    Truncated,
    #[error("invalid container: {0}")]
    InvalidHeader(&'static str),
    #[error("frame {frame}: motion vector ({dx}, {dy}) exceeds search range {range}")]
    MotionOutOfRange { frame: usize, dx: i8, dy: i8, range: u8 },
    #[error("frame {frame}: kind does not match the GOP structure")]
    FrameKind { frame: usize },
    #[error("frame {frame}: {source}")]
    Frame { frame: usize, source: ImageError },
    #[error(transparent)]
    Ppm(#[from] PpmError),
    #[error("{0}")]
    Io(String),
}

/// Frames per second as a positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Option<Self> {
        (num > 0 && den > 0).then_some(Self { num, den })
    }

    pub fn fps(num: u32) -> Option<Self> {
        Self::new(num, 1)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Ordered RGB frames sharing one size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    width: usize,
    height: usize,
    frame_rate: FrameRate,
    frames: Vec<RgbImage>,
}

impl FrameSequence {
    pub fn new(frame_rate: FrameRate, frames: Vec<RgbImage>) -> Result<Self, VideoError> {
        let first = frames.first().ok_or(VideoError::Empty)?;
        let expected = first.dims();
        if let Some(index) = frames.iter().position(|f| f.dims() != expected) {
            return Err(VideoError::DimensionMismatch { index, expected, found: frames[index].dims() });
        }
        Ok(Self { width: expected.0, height: expected.1, frame_rate, frames })
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn frame_rate(&self) -> FrameRate {
        self.frame_rate
    }
    pub fn frames(&self) -> &[RgbImage] {
        &self.frames
    }
    pub fn len(&self) -> usize {
        self.frames.len()
    }
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Uncompressed size: width × height × 3 × frame count.
    pub fn raw_size(&self) -> u64 {
        raw_size(self.width, self.height, self.frames.len())
    }
}

pub fn raw_size(width: usize, height: usize, frames: usize) -> u64 {
    width as u64 * height as u64 * 3 * frames as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VideoParams {
    pub quality: Quality,
    pub gop: u16,
    pub range: u8,
}

impl Default for VideoParams {
    fn default() -> Self {
        Self { quality: Quality::DEFAULT, gop: 16, range: 7 }
    }
}

impl VideoParams {
    pub fn new(quality: Quality, gop: u16, range: u8) -> Result<Self, VideoError> {
        let p = Self { quality, gop, range };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), VideoError> {
        if self.gop == 0 {
            return Err(VideoError::InvalidParameter("GOP length must be at least 1".into()));
        }
        if self.range > MAX_RANGE {
            return Err(VideoError::InvalidParameter(format!("search range must be at most {MAX_RANGE}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoHeader {
    pub width: u16,
    pub height: u16,
    pub frame_rate: FrameRate,
    pub frame_count: u32,
    pub params: VideoParams,
}

impl VideoHeader {
    fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&VIDEO_MAGIC);
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&self.height.to_be_bytes());
        out.extend_from_slice(&self.frame_rate.num.to_be_bytes());
        out.extend_from_slice(&self.frame_rate.den.to_be_bytes());
        out.extend_from_slice(&self.frame_count.to_be_bytes());
        out.push(self.params.quality.level());
        out.extend_from_slice(&self.params.gop.to_be_bytes());
        out.push(self.params.range);
    }

    fn read_from(bytes: &[u8]) -> Result<Self, VideoError> {
        if bytes.len() < 4 || bytes[..4] != VIDEO_MAGIC {
            return Err(if bytes.len() < 4 && VIDEO_MAGIC.starts_with(bytes) {
                VideoError::Truncated
            } else {
                VideoError::BadMagic
            });
        }
        let b = bytes.get(..HEADER_LEN).ok_or(VideoError::Truncated)?;
        let u16_at = |i: usize| u16::from_be_bytes([b[i], b[i + 1]]);
        let u32_at = |i: usize| u32::from_be_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
        let (width, height) = (u16_at(4), u16_at(6));
        if width == 0 || height == 0 {
            return Err(VideoError::InvalidHeader("zero dimension"));
        }
        let frame_rate = FrameRate::new(u32_at(8), u32_at(12)).ok_or(VideoError::InvalidHeader("zero frame rate"))?;
        let quality = Quality::new(b[20]).ok_or(VideoError::InvalidHeader("quality outside 1..=100"))?;
        let params = VideoParams { quality, gop: u16_at(21), range: b[23] };
        params.validate().map_err(|_| VideoError::InvalidHeader("GOP length or search range out of bounds"))?;
        Ok(Self { width, height, frame_rate, frame_count: u32_at(16), params })
    }

    fn macroblocks(&self) -> usize {
        let (mw, mh) = macroblock_grid(self.width as usize, self.height as usize);
        mw * mh
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Intra,
    Inter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedFrame {
    pub kind: FrameKind,
    /// One per macroblock for inter frames, empty for intra frames.
    pub vectors: Vec<MotionVector>,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedVideo {
    pub header: VideoHeader,
    pub frames: Vec<EncodedFrame>,
}

impl CompressedVideo {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.header.write_to(&mut out);
        for f in &self.frames {
            out.push(match f.kind {
                FrameKind::Intra => 0,
                FrameKind::Inter => 1,
            });
            out.extend_from_slice(&(f.payload.len() as u32).to_be_bytes());
            for mv in &f.vectors {
                out.extend_from_slice(&[mv.dx as u8, mv.dy as u8]);
            }
            out.extend_from_slice(&f.payload);
        }
        out
    }

    /// Parses the container structure. Motion vectors are range-checked and
    /// frame kinds are checked against the GOP; payloads are not decoded.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, VideoError> {
        let header = VideoHeader::read_from(bytes)?;
        let mbs = header.macroblocks();
        let range = header.params.range;
        let mut pos = HEADER_LEN;
        let mut take = |n: usize| -> Result<&[u8], VideoError> {
            let s = bytes.get(pos..pos.checked_add(n).ok_or(VideoError::Truncated)?).ok_or(VideoError::Truncated)?;
            pos += n;
            Ok(s)
        };
        let mut frames = Vec::new();
        for i in 0..header.frame_count as usize {
            let head = take(5)?;
            let kind = match head[0] {
                0 => FrameKind::Intra,
                1 => FrameKind::Inter,
                _ => return Err(VideoError::InvalidHeader("unknown frame kind")),
            };
            if (kind == FrameKind::Intra) != (i % header.params.gop as usize == 0) {
                return Err(VideoError::FrameKind { frame: i });
            }
            let len = u32::from_be_bytes([head[1], head[2], head[3], head[4]]) as usize;
            let mut vectors = Vec::new();
            if kind == FrameKind::Inter {
                for pair in take(2 * mbs)?.chunks_exact(2) {
                    let mv = MotionVector::new(pair[0] as i8, pair[1] as i8);
                    if !mv.within(range) {
                        return Err(VideoError::MotionOutOfRange { frame: i, dx: mv.dx, dy: mv.dy, range });
                    }
                    vectors.push(mv);
                }
            }
            frames.push(EncodedFrame { kind, vectors, payload: take(len)?.to_vec() });
        }
        Ok(Self { header, frames })
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.frames.iter().map(|f| 5 + 2 * f.vectors.len() + f.payload.len()).sum::<usize>()
    }

    pub fn frame_rate(&self) -> FrameRate {
        self.header.frame_rate
    }
}

/// Quantized zigzag scan, or all zeros when every coefficient is strictly
/// within one quantizer step of zero.
fn quantize_residual(b: &Block, m: &QuantMatrix) -> [i32; 64] {
    let c = fdct(b);
    if c.0.iter().zip(m.entries()).all(|(v, &q)| v.abs() < q as f64) {
        return [0; 64];
    }
    zigzag(&quantize(&c, m))
}

fn residual_scans(cur: &Plane, pred: &[u8], m: &QuantMatrix) -> Vec<[i32; 64]> {
    let w = cur.width();
    tile_with(w, cur.height(), |x, y| cur.get(x, y) as f64 - pred[y * w + x] as f64)
        .iter()
        .map(|b| quantize_residual(b, m))
        .collect()
}

/// Prediction plus decoded residual, rounded and clamped. Shared by the
/// encoder's reconstruction loop and the decoder.
fn reconstruct(width: usize, height: usize, pred: &[u8], scans: &[[i32; 64]], m: &QuantMatrix) -> Plane {
    let blocks: Vec<Block> =
        scans.iter().map(|s| if s.iter().all(|&v| v == 0) { Block::ZERO } else { inverse_block(s, m) }).collect();
    let mut out = pred.to_vec();
    untile(width, height, &blocks, |x, y, v| {
        let i = y * width + x;
        out[i] = (pred[i] as f64 + v).round().clamp(0.0, 255.0) as u8;
    });
    Plane::new(width, height, out)
}

struct Matrices {
    luma: QuantMatrix,
    chroma: QuantMatrix,
}

impl Matrices {
    fn new(q: Quality) -> Self {
        Self { luma: QuantMatrix::LUMA.scaled(q), chroma: QuantMatrix::CHROMA.scaled(q) }
    }
}

fn predictions(reference: &PlanarImage, vectors: &[MotionVector]) -> [Vec<u8>; 3] {
    let (mw, _) = macroblock_grid(reference.width, reference.height);
    [predict(&reference.y, vectors, mw, 1), predict(&reference.cb, vectors, mw, 2), predict(&reference.cr, vectors, mw, 2)]
}

/// Macroblocks whose zero-motion luma residual quantizes to nothing.
fn static_macroblocks(cur: &Plane, reference: &Plane, m: &QuantMatrix) -> Vec<bool> {
    let (w, h) = (cur.width(), cur.height());
    let zero = residual_scans(cur, reference.samples(), m);
    let (bw, bh) = block_grid(w, h);
    let (mw, mh) = macroblock_grid(w, h);
    let mut out = Vec::with_capacity(mw * mh);
    for my in 0..mh {
        for mx in 0..mw {
            let blocks = (2 * my..(2 * my + 2).min(bh)).flat_map(|by| (2 * mx..(2 * mx + 2).min(bw)).map(move |bx| by * bw + bx));
            out.push(blocks.into_iter().all(|i| zero[i].iter().all(|&v| v == 0)));
        }
    }
    out
}

fn encode_inter(cur: &PlanarImage, reference: &PlanarImage, range: u8, m: &Matrices) -> Result<(EncodedFrame, PlanarImage), CodecError> {
    let still = static_macroblocks(&cur.y, &reference.y, &m.luma);
    let vectors = estimate_motion_except(&cur.y, &reference.y, range, |i| still[i]);
    let [py, pcb, pcr] = predictions(reference, &vectors);

    let y = residual_scans(&cur.y, &py, &m.luma);
    let cb = residual_scans(&cur.cb, &pcb, &m.chroma);
    let cr = residual_scans(&cur.cr, &pcr, &m.chroma);

    let syms = |scans: &[[i32; 64]]| -> Vec<BlockSymbols> { scans.iter().map(|s| rle_encode(s, 0)).collect() };
    let (ys, cbs, crs) = (syms(&y), syms(&cb), syms(&cr));
    let mut luma = SymbolCounts::default();
    luma.add_all(&ys);
    let mut chroma = SymbolCounts::default();
    chroma.add_all(cbs.iter().chain(&crs));
    let (luma_dc, luma_ac) = luma.build_tables()?;
    let (chroma_dc, chroma_ac) = chroma.build_tables()?;

    let mut payload = Vec::new();
    for t in [&luma_dc, &luma_ac, &chroma_dc, &chroma_ac] {
        t.write_to(&mut payload);
    }
    let mut bits = BitWriter::new();
    for s in &ys {
        write_block(&mut bits, s, &luma_dc, &luma_ac)?;
    }
    for s in cbs.iter().chain(&crs) {
        write_block(&mut bits, s, &chroma_dc, &chroma_ac)?;
    }
    payload.extend_from_slice(&bits.finish());

    let recon = PlanarImage {
        width: cur.width,
        height: cur.height,
        subsampling: Subsampling::S420,
        y: reconstruct(cur.y.width(), cur.y.height(), &py, &y, &m.luma),
        cb: reconstruct(cur.cb.width(), cur.cb.height(), &pcb, &cb, &m.chroma),
        cr: reconstruct(cur.cr.width(), cur.cr.height(), &pcr, &cr, &m.chroma),
    };
    Ok((EncodedFrame { kind: FrameKind::Inter, vectors, payload }, recon))
}

fn decode_inter(frame: &EncodedFrame, reference: &PlanarImage, m: &Matrices) -> Result<PlanarImage, CodecError> {
    let mut pos = 0;
    let mut tables = Vec::with_capacity(4);
    for _ in 0..4 {
        let (t, used) = HuffmanTable::read_from(&frame.payload[pos..])?;
        tables.push(t);
        pos += used;
    }
    let mut input = BitReader::new(&frame.payload[pos..]);
    let [py, pcb, pcr] = predictions(reference, &frame.vectors);

    let mut plane = |p: &Plane, pred: &[u8], dc: &HuffmanTable, ac: &HuffmanTable, q: &QuantMatrix| {
        let (bw, bh) = block_grid(p.width(), p.height());
        let mut scans = Vec::with_capacity(bw * bh);
        for _ in 0..bw * bh {
            scans.push(rle_decode(&read_block(&mut input, dc, ac)?, 0)?);
        }
        Ok::<_, CodecError>(reconstruct(p.width(), p.height(), pred, &scans, q))
    };
    let y = plane(&reference.y, &py, &tables[0], &tables[1], &m.luma)?;
    let cb = plane(&reference.cb, &pcb, &tables[2], &tables[3], &m.chroma)?;
    let cr = plane(&reference.cr, &pcr, &tables[2], &tables[3], &m.chroma)?;
    Ok(PlanarImage { width: reference.width, height: reference.height, subsampling: Subsampling::S420, y, cb, cr })
}

fn frame_error(frame: usize) -> impl Fn(ImageError) -> VideoError {
    move |source| VideoError::Frame { frame, source }
}

/// Encodes a sequence and also returns the encoder's reconstructed frames.
pub fn encode_video_traced(seq: &FrameSequence, params: VideoParams) -> Result<(CompressedVideo, Vec<PlanarImage>), VideoError> {
    params.validate()?;
    if seq.width > MAX_DIMENSION || seq.height > MAX_DIMENSION {
        return Err(VideoError::InvalidParameter(format!("frames larger than {MAX_DIMENSION} pixels")));
    }
    let m = Matrices::new(params.quality);
    let mut frames = Vec::with_capacity(seq.len());
    let mut recons: Vec<PlanarImage> = Vec::with_capacity(seq.len());
    for (i, rgb) in seq.frames.iter().enumerate() {
        let planar = PlanarImage::from_rgb(rgb, Subsampling::S420);
        let err = frame_error(i);
        let (frame, recon) = if i % params.gop as usize == 0 {
            let c = encode_planar(&planar, params.quality).map_err(&err)?;
            let recon = decode_planar(&c).map_err(&err)?;
            (EncodedFrame { kind: FrameKind::Intra, vectors: Vec::new(), payload: c.to_bytes() }, recon)
        } else {
            encode_inter(&planar, recons.last().unwrap(), params.range, &m).map_err(|e| err(e.into()))?
        };
        frames.push(frame);
        recons.push(recon);
    }
    let header = VideoHeader {
        width: seq.width as u16,
        height: seq.height as u16,
        frame_rate: seq.frame_rate,
        frame_count: seq.len() as u32,
        params,
    };
    Ok((CompressedVideo { header, frames }, recons))
}

pub fn encode_video(seq: &FrameSequence, params: VideoParams) -> Result<CompressedVideo, VideoError> {
    Ok(encode_video_traced(seq, params)?.0)
}

/// Decodes to Y/Cb/Cr planes, the exact reconstruction the encoder tracked.
pub fn decode_video_planar(c: &CompressedVideo) -> Result<Vec<PlanarImage>, VideoError> {
    let h = &c.header;
    if c.frames.len() != h.frame_count as usize {
        return Err(VideoError::InvalidHeader("frame count does not match header"));
    }
    let (w, ht) = (h.width as usize, h.height as usize);
    let m = Matrices::new(h.params.quality);
    let mbs = h.macroblocks();
    let mut out: Vec<PlanarImage> = Vec::with_capacity(c.frames.len());
    for (i, f) in c.frames.iter().enumerate() {
        let err = frame_error(i);
        if (f.kind == FrameKind::Intra) != (i % h.params.gop as usize == 0) {
            return Err(VideoError::FrameKind { frame: i });
        }
        let recon = match f.kind {
            FrameKind::Intra => {
                let img = CompressedImage::from_bytes(&f.payload).map_err(&err)?;
                if (img.header.width as usize, img.header.height as usize) != (w, ht)
                    || img.header.subsampling != Subsampling::S420
                {
                    return Err(VideoError::InvalidHeader("intra frame geometry differs from the video"));
                }
                decode_planar(&img).map_err(&err)?
            }
            FrameKind::Inter => {
                if f.vectors.len() != mbs {
                    return Err(VideoError::InvalidHeader("motion vector count does not match macroblocks"));
                }
                if let Some(mv) = f.vectors.iter().find(|mv| !mv.within(h.params.range)) {
                    return Err(VideoError::MotionOutOfRange { frame: i, dx: mv.dx, dy: mv.dy, range: h.params.range });
                }
                decode_inter(f, out.last().unwrap(), &m).map_err(|e| err(e.into()))?
            }
        };
        out.push(recon);
    }
    Ok(out)
}

pub fn decode_video(c: &CompressedVideo) -> Result<FrameSequence, VideoError> {
    let frames = decode_video_planar(c)?.iter().map(PlanarImage::to_rgb).collect();
    FrameSequence::new(c.header.frame_rate, frames)
}

pub fn decode_video_bytes(bytes: &[u8]) -> Result<FrameSequence, VideoError> {
    decode_video(&CompressedVideo::from_bytes(bytes)?)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> VideoError + '_ {
    move |e| VideoError::Io(format!("{}: {e}", path.display()))
}

/// Loads `frame_%06d.ppm` files from a directory in numeric order.
pub fn read_frame_dir(dir: &Path, frame_rate: FrameRate) -> Result<FrameSequence, VideoError> {
    let mut numbered = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(n) = name.strip_prefix("frame_").and_then(|r| r.strip_suffix(".ppm")).and_then(|d| d.parse::<u64>().ok()) {
            numbered.push((n, path));
        }
    }
    numbered.sort();
    let frames = numbered
        .iter()
        .map(|(_, p)| Ok(read_ppm(&fs::read(p).map_err(io_err(p))?)?))
        .collect::<Result<Vec<_>, VideoError>>()?;
    FrameSequence::new(frame_rate, frames)
}

/// Writes every frame as `frame_%06d.ppm`, numbered from zero.
pub fn write_frame_dir(seq: &FrameSequence, dir: &Path) -> Result<(), VideoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (i, f) in seq.frames.iter().enumerate() {
        let p = dir.join(format!("frame_{i:06}.ppm"));
        fs::write(&p, write_ppm(f)).map_err(io_err(&p))?;
    }
    Ok(())
}

/// Splits a raw interleaved RGB stream into frames.
pub fn read_raw_frames(bytes: &[u8], width: usize, height: usize, frame_rate: FrameRate) -> Result<FrameSequence, VideoError> {
    let frame = width * height * 3;
    if frame == 0 {
        return Err(VideoError::InvalidParameter("raw frames need nonzero dimensions".into()));
    }
    if bytes.len() % frame != 0 {
        return Err(VideoError::InvalidParameter(format!(
            "raw stream of {} octets is not a whole number of {width}x{height} frames",
            bytes.len()
        )));
    }
    let frames = bytes.chunks_exact(frame).map(|c| RgbImage::new(width, height, c.to_vec())).collect();
    FrameSequence::new(frame_rate, frames)
}
