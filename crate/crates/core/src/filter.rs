//! Mirror-padded neighborhood filters shared by the oracles, the cost engine
//! and cover synthesis.
//!
//! Padding is half-sample symmetric: `d c b a | a b c d | d c b a`. The index
//! map is periodic with period `2n`, so arbitrarily wide windows stay defined
//! even when the window is larger than the image.

use alloc::vec;
use alloc::vec::Vec;

/// Maps a possibly out-of-range index onto `0..n` by symmetric reflection.
#[inline]
pub fn mirror(idx: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    let period = 2 * n as isize;
    let m = idx.rem_euclid(period) as usize;
    if m >= n {
        2 * n - 1 - m
    } else {
        m
    }
}

/// Sum over the `k x k` mirrored neighborhood of every sample (`k` odd).
///
/// Separable: a horizontal pass then a vertical pass, each summing in a fixed
/// left-to-right order. The fixed order keeps the result monotone in the input.
pub fn box_sum(data: &[f64], width: usize, height: usize, k: usize) -> Vec<f64> {
    debug_assert_eq!(data.len(), width * height);
    debug_assert!(k % 2 == 1);
    let r = (k / 2) as isize;
    let mut horiz = vec![0.0; data.len()];
    for row in 0..height {
        let line = &data[row * width..(row + 1) * width];
        for col in 0..width {
            let mut acc = 0.0;
            for off in -r..=r {
                acc += line[mirror(col as isize + off, width)];
            }
            horiz[row * width + col] = acc;
        }
    }
    let mut out = vec![0.0; data.len()];
    for row in 0..height {
        for col in 0..width {
            let mut acc = 0.0;
            for off in -r..=r {
                acc += horiz[mirror(row as isize + off, height) * width + col];
            }
            out[row * width + col] = acc;
        }
    }
    out
}

/// Mean over the `k x k` mirrored neighborhood (`k` odd).
pub fn box_mean(data: &[f64], width: usize, height: usize, k: usize) -> Vec<f64> {
    let area = (k * k) as f64;
    let mut out = box_sum(data, width, height, k);
    for v in &mut out {
        *v /= area;
    }
    out
}

/// Integer `k x k` mirrored box sum.
pub fn box_sum_i64(data: &[i64], width: usize, height: usize, k: usize) -> Vec<i64> {
    let r = (k / 2) as isize;
    let mut horiz = vec![0i64; data.len()];
    for row in 0..height {
        for col in 0..width {
            horiz[row * width + col] = (-r..=r)
                .map(|off| data[row * width + mirror(col as isize + off, width)])
                .sum();
        }
    }
    let mut out = vec![0i64; data.len()];
    for row in 0..height {
        for col in 0..width {
            out[row * width + col] = (-r..=r)
                .map(|off| horiz[mirror(row as isize + off, height) * width + col])
                .sum();
        }
    }
    out
}

/// Correlates `data` with a square kernel of odd side `side` under mirror padding.
pub fn correlate(data: &[f64], width: usize, height: usize, kernel: &[f64], side: usize) -> Vec<f64> {
    debug_assert_eq!(kernel.len(), side * side);
    let r = (side / 2) as isize;
    let mut out = vec![0.0; data.len()];
    for row in 0..height {
        for col in 0..width {
            let mut acc = 0.0;
            for (ki, krow) in kernel.chunks_exact(side).enumerate() {
                let src_row = mirror(row as isize + ki as isize - r, height);
                for (kj, &coef) in krow.iter().enumerate() {
                    let src_col = mirror(col as isize + kj as isize - r, width);
                    acc += coef * data[src_row * width + src_col];
                }
            }
            out[row * width + col] = acc;
        }
    }
    out
}
