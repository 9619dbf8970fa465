//! Orthonormal 8×8 type-II DCT, computed separably as `M · f · Mᵀ`.
//!
//! `M[u][x] = ½·C(u)·cos((2x+1)uπ/16)` with `C(0) = 1/√2`, which gives the
//! usual still-image scaling: a constant block of value `c` has DC `8c`.
//! Coefficient `(u, v)` is stored at `u * 8 + v`, `u` being the vertical
//! frequency.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::LazyLock;

use super::plane::Block;

static BASIS: LazyLock<[[f64; 8]; 8]> = LazyLock::new(|| {
    let mut m = [[0.0; 8]; 8];
    for (u, row) in m.iter_mut().enumerate() {
        let cu = if u == 0 { FRAC_1_SQRT_2 } else { 1.0 };
        for (x, v) in row.iter_mut().enumerate() {
            *v = 0.5 * cu * (((2 * x + 1) * u) as f64 * PI / 16.0).cos();
        }
    }
    m
});

pub fn fdct(b: &Block) -> Block {
    let m = &*BASIS;
    // tmp = M · f
    let mut tmp = [0.0; 64];
    for u in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for y in 0..8 {
                acc += m[u][y] * b.0[y * 8 + x];
            }
            tmp[u * 8 + x] = acc;
        }
    }
    // out = tmp · Mᵀ
    let mut out = Block::ZERO;
    for u in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for x in 0..8 {
                acc += tmp[u * 8 + x] * m[v][x];
            }
            out.0[u * 8 + v] = acc;
        }
    }
    out
}

pub fn idct(c: &Block) -> Block {
    let m = &*BASIS;
    // tmp = Mᵀ · F
    let mut tmp = [0.0; 64];
    for y in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for u in 0..8 {
                acc += m[u][y] * c.0[u * 8 + v];
            }
            tmp[y * 8 + v] = acc;
        }
    }
    // out = tmp · M
    let mut out = Block::ZERO;
    for y in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for v in 0..8 {
                acc += tmp[y * 8 + v] * m[v][x];
            }
            out.0[y * 8 + x] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook quadruple loop, straight from the defining sum.
    fn fdct_direct(b: &Block) -> Block {
        let c = |k: usize| if k == 0 { FRAC_1_SQRT_2 } else { 1.0 };
        let mut out = Block::ZERO;
        for u in 0..8 {
            for v in 0..8 {
                let mut s = 0.0;
                for y in 0..8 {
                    for x in 0..8 {
                        s += b.0[y * 8 + x]
                            * ((2 * y + 1) as f64 * u as f64 * PI / 16.0).cos()
                            * ((2 * x + 1) as f64 * v as f64 * PI / 16.0).cos();
                    }
                }
                out.0[u * 8 + v] = 0.25 * c(u) * c(v) * s;
            }
        }
        out
    }

    fn max_err(a: &Block, b: &Block) -> f64 {
        a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_block() {
        let f = fdct(&Block([10.0; 64]));
        assert!((f.0[0] - 80.0).abs() < 1e-12);
        assert!(f.0[1..].iter().all(|c| c.abs() < 1e-12));

        let mut dc = Block::ZERO;
        dc.0[0] = 80.0;
        assert!(max_err(&idct(&dc), &Block([10.0; 64])) < 1e-12);
        assert_eq!(idct(&Block::ZERO), Block::ZERO);
    }

    #[test]
    fn matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xD1C7);
        for _ in 0..100 {
            let mut b = Block::ZERO;
            for v in b.0.iter_mut() {
                *v = rng.random_range(-128.0..128.0);
            }
            let fast = fdct(&b);
            assert!(max_err(&fast, &fdct_direct(&b)) < 1e-9);
            assert!(max_err(&idct(&fast), &b) < 1e-9);
        }
    }

    #[test]
    fn one_fixed_block_against_frozen_oracle_values() {
        // Ramp f(y, x) = 8y + x - 64; DC = Σf / 8 = 8 * mean = -260.
        let mut b = Block::ZERO;
        for y in 0..8 {
            for x in 0..8 {
                b.0[y * 8 + x] = (8 * y + x) as f64 - 64.0;
            }
        }
        let direct = fdct_direct(&b);
        let fast = fdct(&b);
        assert!(max_err(&fast, &direct) < 1e-9);
        assert!((fast.0[0] - -260.0).abs() < 1e-9);
    }
}
