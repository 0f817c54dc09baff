//! Embedding costs from oracle curvature, plus the HILL baseline.
//!
//! The proposed cost of pixel `(i, j)` is the clamped second derivative of the
//! oracle score with respect to that pixel's intensity, estimated with the
//! five-point fourth-order stencil
//!
//! ```text
//! f'' ~ (-f(x-2) + 16 f(x-1) - 30 f(x) + 16 f(x+1) - f(x+2)) / 12
//! ```
//!
//! then min-max scaled, box-averaged over `k x k`, floored at [`EPS`], with
//! saturated pixels (0 and 255) marked wet.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CostError;
use crate::filter::{box_mean, correlate};
use crate::image::GrayImage;
use crate::oracle::{ModelOracle, PixelProbe};
use crate::par::map_indexed;

/// Cost carried by wet pixels.
pub const WET: f64 = 1e10;
/// Floor for non-wet costs; a zero cost would make changes free.
pub const EPS: f64 = 1e-6;
/// Average filter size used when none is given.
pub const DEFAULT_FILTER_SIZE: usize = 13;
/// Side of the second averaging filter of the HILL baseline.
pub const HILL_LOWPASS: usize = 15;

/// 3x3 KerBohme high-pass kernel.
#[rustfmt::skip]
pub const KB3_KERNEL: [f64; 9] = [
    -0.25,  0.5, -0.25,
     0.5,  -1.0,  0.5,
    -0.25,  0.5, -0.25,
];

/// Per-pixel estimate of the oracle's second derivative, or any later stage
/// of the cost pipeline before wet handling.
#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SensitivityMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, CostError> {
        if values.len() != width * height {
            return Err(CostError::Invalid("value count does not match dimensions"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CostError::Invalid("non-finite sensitivity"));
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { width: self.width, height: self.height, values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

/// Per-pixel costs with a wet mask.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMap {
    width: usize,
    height: usize,
    costs: Vec<f64>,
    wet: Vec<bool>,
}

/// Summary statistics over the non-wet pixels of a cost map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub wet_count: usize,
    pub pixel_count: usize,
}

impl CostMap {
    /// Validates and wraps cost data. Wet pixels must carry [`WET`].
    pub fn new(width: usize, height: usize, costs: Vec<f64>, wet: Vec<bool>) -> Result<Self, CostError> {
        if costs.len() != width * height || wet.len() != width * height {
            return Err(CostError::Invalid("length does not match dimensions"));
        }
        for (&c, &w) in costs.iter().zip(&wet) {
            if !c.is_finite() || c < 0.0 {
                return Err(CostError::Invalid("costs must be finite and nonnegative"));
            }
            if w && c != WET {
                return Err(CostError::Invalid("wet pixel without WET cost"));
            }
        }
        Ok(Self { width, height, costs, wet })
    }

    /// Marks every saturated pixel of `img` wet and floors the rest at [`EPS`].
    fn finish(img: &GrayImage, mut costs: Vec<f64>) -> Self {
        let wet = img.saturation_mask();
        for (c, &w) in costs.iter_mut().zip(&wet) {
            *c = if w { WET } else { c.max(EPS) };
        }
        Self { width: img.width(), height: img.height(), costs, wet }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn wet(&self) -> &[bool] {
        &self.wet
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.costs[row * self.width + col]
    }

    pub fn is_wet(&self, row: usize, col: usize) -> bool {
        self.wet[row * self.width + col]
    }

    pub fn dry_count(&self) -> usize {
        self.wet.iter().filter(|&&w| !w).count()
    }

    pub fn summary(&self) -> CostSummary {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut dry = 0usize;
        for (&c, &w) in self.costs.iter().zip(&self.wet) {
            if !w {
                min = min.min(c);
                max = max.max(c);
                sum += c;
                dry += 1;
            }
        }
        let mean = if dry > 0 { sum / dry as f64 } else { f64::NAN };
        if dry == 0 {
            min = f64::NAN;
            max = f64::NAN;
        }
        CostSummary { min, max, mean, wet_count: self.len() - dry, pixel_count: self.len() }
    }
}

/// Five-point second difference from oracle values at `x-2 .. x+2`.
///
/// Written in terms of differences from the center value; the coefficients
/// sum to zero, so this equals the plain weighted sum but cancels exactly
/// when the oracle ignores the pixel.
#[inline]
pub fn five_point_second_difference(f_m2: f64, f_m1: f64, f0: f64, f_p1: f64, f_p2: f64) -> f64 {
    (-(f_m2 - f0) + 16.0 * (f_m1 - f0) + 16.0 * (f_p1 - f0) - (f_p2 - f0)) / 12.0
}

#[inline]
fn shifted(x: u8, d: i32) -> u8 {
    (x as i32 + d).clamp(0, 255) as u8
}

/// Second-derivative estimate of the oracle score at every pixel.
///
/// The unaltered score is evaluated once; each pixel then costs four probe
/// calls. Shifted intensities are clamped into `[0, 255]`.
pub fn second_derivative_map<O: ModelOracle + ?Sized>(oracle: &O, img: &GrayImage) -> SensitivityMap {
    let probe = oracle.probe(img);
    let f0 = probe.base_score();
    let (w, h) = (img.width(), img.height());
    let rows = map_indexed(h, |row| {
        (0..w)
            .map(|col| {
                let x = img.get(row, col);
                let at = |d: i32| probe.score_with_pixel(row, col, shifted(x, d));
                five_point_second_difference(at(-2), at(-1), f0, at(1), at(2))
            })
            .collect::<Vec<f64>>()
    });
    SensitivityMap { width: w, height: h, values: rows.concat() }
}

/// Elementwise `max(value, 0)`.
pub fn clamp_negative(raw: &SensitivityMap) -> SensitivityMap {
    raw.map(|v| v.max(0.0))
}

/// Min-max scaling to `[0, 1]`; a constant map becomes all 0.5.
pub fn scale_linear(raw: &SensitivityMap) -> SensitivityMap {
    scale_linear_masked(raw, None)
}

/// Min-max scaling where the range is taken over pixels not flagged in
/// `exclude`. Excluded pixels are mapped with the same transform and clipped
/// to `[0, 1]`.
pub fn scale_linear_masked(raw: &SensitivityMap, exclude: Option<&[bool]>) -> SensitivityMap {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (idx, &v) in raw.values.iter().enumerate() {
        if exclude.is_some_and(|m| m[idx]) {
            continue;
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi <= lo || hi.is_nan() {
        return raw.map(|_| 0.5);
    }
    let span = hi - lo;
    raw.map(|v| ((v - lo) / span).clamp(0.0, 1.0))
}

/// Mean over the mirrored `k x k` neighborhood of each pixel. `k` must be odd.
pub fn average_filter(map: &SensitivityMap, k: usize) -> Result<SensitivityMap, CostError> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(CostError::FilterSize(k as i64));
    }
    if k == 1 {
        return Ok(map.clone());
    }
    Ok(SensitivityMap { width: map.width, height: map.height, values: box_mean(&map.values, map.width, map.height, k) })
}

/// Scaling, smoothing and wet handling applied to a raw sensitivity map.
///
/// Split out of [`build_cost_map`] so one curvature estimate can feed several
/// filter sizes.
pub fn cost_from_sensitivity(raw: &SensitivityMap, img: &GrayImage, k: usize) -> Result<CostMap, CostError> {
    if raw.width != img.width() || raw.height != img.height() {
        return Err(CostError::DimensionMismatch(raw.width, raw.height, img.width(), img.height()));
    }
    let saturated = img.saturation_mask();
    let scaled = scale_linear_masked(&clamp_negative(raw), Some(&saturated));
    let smoothed = average_filter(&scaled, k)?;
    Ok(CostMap::finish(img, smoothed.values))
}

/// The full proposed cost: curvature, clamp, scale, smooth, wet pixels.
pub fn build_cost_map<O: ModelOracle + ?Sized>(oracle: &O, img: &GrayImage, k: usize) -> Result<CostMap, CostError> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(CostError::FilterSize(k as i64));
    }
    cost_from_sensitivity(&second_derivative_map(oracle, img), img, k)
}

/// Absolute KB3 residual of `img` under mirror padding.
pub fn hill_residual(img: &GrayImage) -> Vec<f64> {
    let data: Vec<f64> = img.pixels().iter().map(|&p| p as f64).collect();
    let mut r = correlate(&data, img.width(), img.height(), &KB3_KERNEL, 3);
    r.iter_mut().for_each(|v| *v = v.abs());
    r
}

fn hill_from_abs_residual(abs_residual: &[f64], img: &GrayImage) -> CostMap {
    let (w, h) = (img.width(), img.height());
    let smooth = box_mean(&box_mean(abs_residual, w, h, 3), w, h, HILL_LOWPASS);
    CostMap::finish(img, smooth.into_iter().map(|v| 1.0 / v.max(EPS)).collect())
}

/// HILL-style baseline: `1 / max(EPS, avg15(avg3(|KB3 * X|)))`.
pub fn hill_cost(img: &GrayImage) -> CostMap {
    hill_from_abs_residual(&hill_residual(img), img)
}

/// Additive distortion `sum rho_ij |x_ij - y_ij|` of a ternary change.
pub fn additive_distortion(x: &GrayImage, y: &GrayImage, rho: &CostMap) -> Result<f64, CostError> {
    if x.width() != y.width() || x.height() != y.height() {
        return Err(CostError::DimensionMismatch(x.width(), x.height(), y.width(), y.height()));
    }
    if rho.width != x.width() || rho.height != x.height() {
        return Err(CostError::DimensionMismatch(x.width(), x.height(), rho.width, rho.height));
    }
    let mut total = 0.0;
    for (idx, (&a, &b)) in x.pixels().iter().zip(y.pixels()).enumerate() {
        let delta = b as i32 - a as i32;
        match delta {
            0 => {}
            1 | -1 => total += rho.costs[idx],
            _ => {
                return Err(CostError::NotTernary { row: idx / x.width(), col: idx % x.width(), delta });
            }
        }
    }
    Ok(total)
}

/// Convenience for tests and tools: an all-dry cost map with the given costs.
pub fn dry_cost_map(width: usize, height: usize, costs: Vec<f64>) -> Result<CostMap, CostError> {
    CostMap::new(width, height, costs, vec![false; width * height])
}
