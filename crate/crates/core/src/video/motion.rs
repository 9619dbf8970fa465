use crate::codec::Plane;

pub const MACROBLOCK: usize = 16;

/// Integer displacement of a macroblock's content from the reference frame
/// to the current one: the prediction for `(x, y)` is the reference sample
/// at `(x - dx, y - dy)`, edges replicated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MotionVector {
    pub dx: i8,
    pub dy: i8,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub fn new(dx: i8, dy: i8) -> Self {
        Self { dx, dy }
    }

    pub fn within(self, range: u8) -> bool {
        self.dx.unsigned_abs() <= range && self.dy.unsigned_abs() <= range
    }

    /// Chroma displacement for 4:2:0, halved and truncated toward zero.
    pub fn halved(self) -> MotionVector {
        MotionVector { dx: self.dx / 2, dy: self.dy / 2 }
    }
}

pub fn macroblock_grid(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(MACROBLOCK), height.div_ceil(MACROBLOCK))
}

/// Candidates in tie-break order: smallest |dx|+|dy|, then dy, then dx.
fn candidates(range: u8) -> Vec<MotionVector> {
    let r = range as i8;
    let mut v: Vec<MotionVector> = (-r..=r).flat_map(|dy| (-r..=r).map(move |dx| MotionVector::new(dx, dy))).collect();
    v.sort_by_key(|m| ((m.dx as i32).abs() + (m.dy as i32).abs(), m.dy, m.dx));
    v
}

fn sad(cur: &Plane, reference: &Plane, x0: usize, y0: usize, x1: usize, y1: usize, mv: MotionVector, limit: u64) -> u64 {
    let w = reference.width() as isize;
    let h = reference.height() as isize;
    let refs = reference.samples();
    let cs = cur.samples();
    let mut total = 0u64;
    for y in y0..y1 {
        let ry = (y as isize - mv.dy as isize).clamp(0, h - 1) as usize;
        let rrow = &refs[ry * w as usize..(ry + 1) * w as usize];
        let crow = &cs[y * cur.width()..];
        let sx = x0 as isize - mv.dx as isize;
        if sx >= 0 && sx + (x1 - x0) as isize <= w {
            let rs = &rrow[sx as usize..sx as usize + (x1 - x0)];
            for (a, b) in crow[x0..x1].iter().zip(rs) {
                total += a.abs_diff(*b) as u64;
            }
        } else {
            for x in x0..x1 {
                let rx = (x as isize - mv.dx as isize).clamp(0, w - 1) as usize;
                total += crow[x].abs_diff(rrow[rx]) as u64;
            }
        }
        if total >= limit {
            return total;
        }
    }
    total
}

/// Full-search block matching of every 16×16 luma macroblock (clipped at the
/// frame edge) against `reference`, minimizing the sum of absolute
/// differences. Returns one vector per macroblock in raster order.
pub fn estimate_motion(cur: &Plane, reference: &Plane, range: u8) -> Vec<MotionVector> {
    estimate_motion_except(cur, reference, range, |_| false)
}

/// As [`estimate_motion`], but macroblocks for which `keep_zero(index)` holds
/// are assigned the zero vector without searching.
pub(crate) fn estimate_motion_except(
    cur: &Plane,
    reference: &Plane,
    range: u8,
    keep_zero: impl Fn(usize) -> bool,
) -> Vec<MotionVector> {
    assert_eq!((cur.width(), cur.height()), (reference.width(), reference.height()));
    let (w, h) = (cur.width(), cur.height());
    let (mw, mh) = macroblock_grid(w, h);
    let cands = candidates(range);
    let mut out = Vec::with_capacity(mw * mh);
    for my in 0..mh {
        for mx in 0..mw {
            if keep_zero(out.len()) {
                out.push(MotionVector::ZERO);
                continue;
            }
            let (x0, y0) = (mx * MACROBLOCK, my * MACROBLOCK);
            let (x1, y1) = ((x0 + MACROBLOCK).min(w), (y0 + MACROBLOCK).min(h));
            let mut best = (u64::MAX, MotionVector::ZERO);
            for &mv in &cands {
                let s = sad(cur, reference, x0, y0, x1, y1, mv, best.0);
                if s < best.0 {
                    best = (s, mv);
                    if s == 0 {
                        break;
                    }
                }
            }
            out.push(best.1);
        }
    }
    out
}

/// Motion-compensated prediction of a plane. `scale` is the plane's
/// downsampling factor relative to luma (1 or 2); chroma uses halved vectors.
pub fn predict(reference: &Plane, vectors: &[MotionVector], mb_cols: usize, scale: usize) -> Vec<u8> {
    let (w, h) = (reference.width(), reference.height());
    let size = MACROBLOCK / scale;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mv = vectors[(y / size) * mb_cols + x / size];
            let mv = if scale == 2 { mv.halved() } else { mv };
            out.push(reference.get_clamped(x as isize - mv.dx as isize, y as isize - mv.dy as isize));
        }
    }
    out
}
