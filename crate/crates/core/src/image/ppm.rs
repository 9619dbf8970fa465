//! Binary PPM (P6) with a maximum sample value of 255.

use thiserror::Error;

use crate::raster::RgbImage;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PpmError {
    #[error("not a binary PPM (P6) file")]
    NotP6,
    #[error("malformed header: {0}")]
    Header(&'static str),
    #[error("unsupported maximum value {0}; only 255 is accepted")]
    MaxVal(u32),
    #[error("raster truncated: expected {expected} octets, found {found}")]
    Truncated { expected: usize, found: usize },
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u32, PpmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PpmError::Header("expected a decimal number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PpmError::Header("number out of range"))
    }
}

pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage, PpmError> {
    if bytes.get(..2) != Some(b"P6") {
        return Err(PpmError::NotP6);
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(PpmError::NotP6);
    }
    let width = cur.number()? as usize;
    let height = cur.number()? as usize;
    let maxval = cur.number()?;
    if width == 0 || height == 0 {
        return Err(PpmError::Header("zero dimension"));
    }
    if maxval != 255 {
        return Err(PpmError::MaxVal(maxval));
    }
    // Exactly one whitespace octet separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(PpmError::Header("missing separator before raster")),
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or(PpmError::Header("dimensions overflow"))?;
    let raster = &bytes[cur.pos..];
    if raster.len() < expected {
        return Err(PpmError::Truncated { expected, found: raster.len() });
    }
    Ok(RgbImage::new(width, height, raster[..expected].to_vec()))
}

pub fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_bytes());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::Pixel;

    #[test]
    fn one_red_pixel() {
        let img = read_ppm(b"P6 1 1 255 \xff\x00\x00").unwrap();
        assert_eq!(img.dims(), (1, 1));
        assert_eq!(img.pixel(0, 0), Pixel::new(255, 0, 0));
    }

    #[test]
    fn comments_are_skipped() {
        let img = read_ppm(b"P6\n# made by hand\n2 # width\n1\n# max\n255\n\x01\x02\x03\x04\x05\x06")
            .unwrap();
        assert_eq!(img.as_bytes(), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn canonical_files_round_trip() {
        let bytes = b"P6\n2 2\n255\n\x00\x01\x02\x03\x04\x05\x06\x07\x08\x09\x0a\x0b".to_vec();
        assert_eq!(write_ppm(&read_ppm(&bytes).unwrap()), bytes);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(read_ppm(b"P3 1 1 255 0 0 0"), Err(PpmError::NotP6));
        assert_eq!(read_ppm(b"P6 1 1 65535 \0\0\0\0\0\0"), Err(PpmError::MaxVal(65535)));
        assert_eq!(read_ppm(b"P6 2 1 255 \0\0\0"), Err(PpmError::Truncated { expected: 6, found: 3 }));
        assert!(matches!(read_ppm(b"P6 x 1 255 "), Err(PpmError::Header(_))));
        assert!(matches!(read_ppm(b"P6 0 1 255 "), Err(PpmError::Header(_))));
        assert_eq!(read_ppm(b""), Err(PpmError::NotP6));
    }
}
