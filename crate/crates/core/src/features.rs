//! First-order residual histograms: a small SPAM-like image model.
//!
//! For every pixel the horizontal difference `x[r][c+1] - x[r][c]` and the
//! vertical difference `x[r+1][c] - x[r][c]` are truncated to `[-T, T]` and
//! binned. Borders use symmetric mirror padding, so each direction contributes
//! exactly one difference per pixel and each normalized histogram sums to 1.
//!
//! Layout: `2T + 1` horizontal bins (difference `-T` first) followed by
//! `2T + 1` vertical bins.

use alloc::vec;
use alloc::vec::Vec;

use crate::filter::mirror;
use crate::image::GrayImage;

pub const DEFAULT_THRESHOLD: u32 = 3;

/// Feature vector length for truncation threshold `t`.
#[inline]
pub const fn feature_dim(t: u32) -> usize {
    2 * (2 * t as usize + 1)
}

/// Unnormalized residual histogram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualHistogram {
    threshold: u32,
    counts: Vec<u32>,
}

/// A pixel value that may be overridden at one position.
#[derive(Clone, Copy)]
pub(crate) struct PixelView<'a> {
    pub img: &'a GrayImage,
    pub edit: Option<(usize, usize, u8)>,
}

impl PixelView<'_> {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> i32 {
        match self.edit {
            Some((r, c, v)) if r == row && c == col => v as i32,
            _ => self.img.get(row, col) as i32,
        }
    }
}

#[inline]
fn bin(diff: i32, t: u32) -> usize {
    let t = t as i32;
    (diff.clamp(-t, t) + t) as usize
}

impl ResidualHistogram {
    pub fn compute(img: &GrayImage, threshold: u32) -> Self {
        let view = PixelView { img, edit: None };
        let mut counts = vec![0u32; feature_dim(threshold)];
        for row in 0..img.height() {
            for col in 0..img.width() {
                let (h, v) = Self::bins_at(&view, row, col, threshold);
                counts[h] += 1;
                counts[v] += 1;
            }
        }
        Self { threshold, counts }
    }

    /// Horizontal and vertical bin indices of the differences anchored at `(row, col)`.
    #[inline]
    fn bins_at(view: &PixelView<'_>, row: usize, col: usize, t: u32) -> (usize, usize) {
        let (w, h) = (view.img.width(), view.img.height());
        let here = view.at(row, col);
        let right = view.at(row, mirror(col as isize + 1, w));
        let below = view.at(mirror(row as isize + 1, h), col);
        let half = 2 * t as usize + 1;
        (bin(right - here, t), half + bin(below - here, t))
    }

    /// Histogram of the image with pixel `(row, col)` set to `value`, updating
    /// only the differences that touch that pixel.
    pub fn with_pixel(&self, img: &GrayImage, row: usize, col: usize, value: u8) -> Self {
        let t = self.threshold;
        let mut counts = self.counts.clone();
        let old = PixelView { img, edit: None };
        let new = PixelView { img, edit: Some((row, col, value)) };
        // Differences reading (row, col), mirrored or not, are anchored within one
        // pixel of it.
        for r in row.saturating_sub(1)..=(row + 1).min(img.height() - 1) {
            for c in col.saturating_sub(1)..=(col + 1).min(img.width() - 1) {
                let (oh, ov) = Self::bins_at(&old, r, c, t);
                let (nh, nv) = Self::bins_at(&new, r, c, t);
                counts[oh] -= 1;
                counts[ov] -= 1;
                counts[nh] += 1;
                counts[nv] += 1;
            }
        }
        Self { threshold: t, counts }
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Counts normalized by the pixel count.
    pub fn normalized(&self, pixel_count: usize) -> Vec<f64> {
        let n = pixel_count as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Normalized residual histogram features of `img`.
pub fn extract_features(img: &GrayImage, threshold: u32) -> Vec<f64> {
    ResidualHistogram::compute(img, threshold).normalized(img.len())
}
