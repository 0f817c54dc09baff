use alloc::vec::Vec;

use super::{ModelOracle, PixelProbe};
use crate::features::PixelView;
use crate::filter::mirror;
use crate::image::GrayImage;
use crate::logistic::logistic;

/// The 5x5 KV predictor-residual kernel, multiplied by [`KV_KERNEL_SCALE`].
#[rustfmt::skip]
pub const KV_KERNEL: [i32; 25] = [
    -1,  2,  -2,  2, -1,
     2, -6,   8, -6,  2,
    -2,  8, -12,  8, -2,
     2, -6,   8, -6,  2,
    -1,  2,  -2,  2, -1,
];

pub const KV_KERNEL_SCALE: i32 = 12;

/// Detector-style oracle `logistic(gain * mean|KV * X| + bias)`.
///
/// Residuals are accumulated as integers (the kernel scaled by 12), so full
/// scoring and incremental re-scoring produce bit-identical results.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterLogitOracle {
    pub gain: f64,
    pub bias: f64,
}

impl Default for FilterLogitOracle {
    fn default() -> Self {
        Self { gain: 0.05, bias: -2.0 }
    }
}

#[inline]
fn residual_at(view: &PixelView<'_>, row: usize, col: usize) -> i32 {
    let (w, h) = (view.img.width(), view.img.height());
    let mut acc = 0;
    for a in 0..5 {
        let r = mirror(row as isize + a as isize - 2, h);
        for b in 0..5 {
            let c = mirror(col as isize + b as isize - 2, w);
            acc += KV_KERNEL[a * 5 + b] * view.at(r, c);
        }
    }
    acc
}

impl FilterLogitOracle {
    pub const KIND: &'static str = "filter-logit";

    pub fn new(gain: f64, bias: f64) -> Self {
        Self { gain, bias }
    }

    /// Scaled residual map `12 * (KV * X)` under mirror padding.
    pub fn residuals(img: &GrayImage) -> Vec<i32> {
        let view = PixelView { img, edit: None };
        let mut out = Vec::with_capacity(img.len());
        for row in 0..img.height() {
            for col in 0..img.width() {
                out.push(residual_at(&view, row, col));
            }
        }
        out
    }

    #[inline]
    fn score_from_abs_total(&self, abs_total: i64, pixels: usize) -> f64 {
        let mean_abs = abs_total as f64 / (KV_KERNEL_SCALE as f64 * pixels as f64);
        logistic(self.gain * mean_abs + self.bias)
    }
}

impl ModelOracle for FilterLogitOracle {
    type Probe<'a> = FilterLogitProbe<'a>;

    fn score(&self, img: &GrayImage) -> f64 {
        let total: i64 = Self::residuals(img).iter().map(|r| r.unsigned_abs() as i64).sum();
        self.score_from_abs_total(total, img.len())
    }

    fn probe<'a>(&'a self, img: &'a GrayImage) -> FilterLogitProbe<'a> {
        let residuals = Self::residuals(img);
        let abs_total = residuals.iter().map(|r| r.unsigned_abs() as i64).sum();
        FilterLogitProbe { oracle: self, img, residuals, abs_total }
    }
}

pub struct FilterLogitProbe<'a> {
    oracle: &'a FilterLogitOracle,
    img: &'a GrayImage,
    residuals: Vec<i32>,
    abs_total: i64,
}

impl PixelProbe for FilterLogitProbe<'_> {
    fn base_score(&self) -> f64 {
        self.oracle.score_from_abs_total(self.abs_total, self.img.len())
    }

    fn score_with_pixel(&self, row: usize, col: usize, value: u8) -> f64 {
        let img = self.img;
        let (w, h) = (img.width(), img.height());
        let view = PixelView { img, edit: Some((row, col, value)) };
        let mut total = self.abs_total;
        // Every residual that reads (row, col), directly or through the mirror,
        // is centered within two pixels of it.
        for r in row.saturating_sub(2)..=(row + 2).min(h - 1) {
            for c in col.saturating_sub(2)..=(col + 2).min(w - 1) {
                let old = self.residuals[r * w + c];
                let new = residual_at(&view, r, c);
                total += new.unsigned_abs() as i64 - old.unsigned_abs() as i64;
            }
        }
        self.oracle.score_from_abs_total(total, img.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{synth_cover, TextureSpec};
    use crate::rng::SplitMix64;

    #[test]
    fn kernel_is_a_zero_sum_residual() {
        assert_eq!(KV_KERNEL.iter().sum::<i32>(), 0);
        // symmetric under transposition and flips
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(KV_KERNEL[a * 5 + b], KV_KERNEL[b * 5 + a]);
                assert_eq!(KV_KERNEL[a * 5 + b], KV_KERNEL[(4 - a) * 5 + b]);
            }
        }
    }

    #[test]
    fn flat_image_scores_logistic_of_bias() {
        let oracle = FilterLogitOracle::new(3.0, 0.7);
        let img = GrayImage::filled(9, 9, 200).unwrap();
        assert_eq!(oracle.score(&img), logistic(0.7));
    }

    #[test]
    fn noisier_images_score_higher_with_positive_gain() {
        let oracle = FilterLogitOracle::default();
        let smooth = synth_cover(TextureSpec::SmoothedNoise { kernel: 7 }, 32, 32, 1).unwrap();
        let rough = synth_cover(TextureSpec::SmoothedNoise { kernel: 1 }, 32, 32, 1).unwrap();
        let (s, r) = (oracle.score(&smooth), oracle.score(&rough));
        assert!(s < r && s > 0.0 && r < 1.0);
    }

    #[test]
    fn probe_matches_full_rescore_including_borders() {
        let oracle = FilterLogitOracle::default();
        let img = synth_cover(TextureSpec::SmoothedNoise { kernel: 1 }, 7, 6, 9).unwrap();
        let probe = oracle.probe(&img);
        assert_eq!(probe.base_score(), oracle.score(&img));
        let mut rng = SplitMix64::new(4);
        for row in 0..6 {
            for col in 0..7 {
                let v = rng.below(256) as u8;
                let full = oracle.score(&img.with_pixel(row, col, v));
                assert_eq!(probe.score_with_pixel(row, col, v), full, "({row},{col})");
            }
        }
    }
}
