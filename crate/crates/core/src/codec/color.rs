//! Full-range BT.601 color conversion (the JFIF convention).

/// An 8-bit RGB sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Pixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Pixel {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Returns `(y, cb, cr)`.
pub fn rgb_to_ycbcr(p: Pixel) -> (u8, u8, u8) {
    let (r, g, b) = (p.r as f64, p.g as f64, p.b as f64);
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = 128.0 - 0.168_736 * r - 0.331_264 * g + 0.5 * b;
    let cr = 128.0 + 0.5 * r - 0.418_688 * g - 0.081_312 * b;
    (to_u8(y), to_u8(cb), to_u8(cr))
}

pub fn ycbcr_to_rgb(y: u8, cb: u8, cr: u8) -> Pixel {
    let y = y as f64;
    let cb = cb as f64 - 128.0;
    let cr = cr as f64 - 128.0;
    Pixel {
        r: to_u8(y + 1.402 * cr),
        g: to_u8(y - 0.344_136 * cb - 0.714_136 * cr),
        b: to_u8(y + 1.772 * cb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_black_red() {
        assert_eq!(rgb_to_ycbcr(Pixel::new(255, 255, 255)), (255, 128, 128));
        assert_eq!(rgb_to_ycbcr(Pixel::new(0, 0, 0)), (0, 128, 128));
        // Y = 76.245, Cb = 84.97, Cr = 255.5 -> clamped.
        assert_eq!(rgb_to_ycbcr(Pixel::new(255, 0, 0)), (76, 85, 255));
        assert_eq!(ycbcr_to_rgb(255, 128, 128), Pixel::new(255, 255, 255));
        assert_eq!(ycbcr_to_rgb(0, 128, 128), Pixel::new(0, 0, 0));
    }

    #[test]
    fn cube_corners_round_trip_within_two() {
        for bits in 0..8u8 {
            let c = |i: u8| if bits >> i & 1 == 1 { 255 } else { 0 };
            let p = Pixel::new(c(0), c(1), c(2));
            let (y, cb, cr) = rgb_to_ycbcr(p);
            let q = ycbcr_to_rgb(y, cb, cr);
            for (a, b) in [(p.r, q.r), (p.g, q.g), (p.b, q.b)] {
                assert!(a.abs_diff(b) <= 2, "{p:?} -> {q:?}");
            }
        }
    }
}
