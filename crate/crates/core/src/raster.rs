//! Interleaved 8-bit RGB rasters.

use crate::codec::Pixel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    /// `data` is `width * height` RGB triples, row-major. Panics on a size
    /// mismatch.
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height * 3, "raster length must be width*height*3");
        Self { width, height, data }
    }

    pub fn filled(width: usize, height: usize, p: Pixel) -> Self {
        let data = [p.r, p.g, p.b].repeat(width * height);
        Self::new(width, height, data)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Pixel) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                let p = f(x, y);
                data.extend_from_slice(&[p.r, p.g, p.b]);
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Pixel {
        let i = (y * self.width + x) * 3;
        Pixel::new(self.data[i], self.data[i + 1], self.data[i + 2])
    }
}
