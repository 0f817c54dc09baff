//! Steganalyzer oracles: pure scorers `NN(X)` whose curvature defines cost.
//!
//! Any type implementing [`ModelOracle`] plugs into the cost engine. An oracle
//! must be a pure function of the image. Detector-style oracles return a
//! probability of "stego" in `(0, 1)`; test oracles may return any finite value.
//!
//! Single-pixel re-scoring goes through a [`PixelProbe`] bound to one image.
//! The probe caches whatever per-image state the oracle needs so a
//! `score_with_pixel` call only touches the terms the edited pixel reaches.

mod filter_logit;
mod linear_residual;
mod polynomial;

pub use filter_logit::{FilterLogitOracle, FilterLogitProbe, KV_KERNEL, KV_KERNEL_SCALE};
pub use linear_residual::{train_linear_oracle, LinearResidualOracle, LinearResidualProbe, TrainedOracle};
pub use polynomial::{PixelPolynomialOracle, PolynomialProbe};

use crate::error::OracleError;
use crate::image::GrayImage;

/// Per-image state for fast single-pixel re-scoring.
pub trait PixelProbe: Sync {
    /// `NN(X)` for the bound image.
    fn base_score(&self) -> f64;

    /// `NN(X)` with pixel `(row, col)` replaced by `value`. Coordinates are
    /// trusted; use [`score_with_pixel`] for a checked call.
    fn score_with_pixel(&self, row: usize, col: usize, value: u8) -> f64;
}

pub trait ModelOracle: Sync {
    type Probe<'a>: PixelProbe
    where
        Self: 'a;

    fn score(&self, img: &GrayImage) -> f64;

    fn probe<'a>(&'a self, img: &'a GrayImage) -> Self::Probe<'a>;
}

impl<O: ModelOracle + ?Sized> ModelOracle for &O {
    type Probe<'a>
        = O::Probe<'a>
    where
        Self: 'a;

    fn score(&self, img: &GrayImage) -> f64 {
        (**self).score(img)
    }

    fn probe<'a>(&'a self, img: &'a GrayImage) -> Self::Probe<'a> {
        (**self).probe(img)
    }
}

/// Checked single-pixel re-score of `img` with `(row, col)` set to `value`.
pub fn score_with_pixel<O: ModelOracle + ?Sized>(
    oracle: &O,
    img: &GrayImage,
    row: usize,
    col: usize,
    value: i32,
) -> Result<f64, OracleError> {
    check_edit(img, row, col, value)?;
    Ok(oracle.probe(img).score_with_pixel(row, col, value as u8))
}

pub(crate) fn check_edit(img: &GrayImage, row: usize, col: usize, value: i32) -> Result<(), OracleError> {
    if row >= img.height() || col >= img.width() {
        return Err(OracleError::OutOfBounds { row, col, width: img.width(), height: img.height() });
    }
    if !(0..=255).contains(&value) {
        return Err(OracleError::BadIntensity(value));
    }
    Ok(())
}

/// Probe that materializes the edited image and rescores it in full.
///
/// Correct for any oracle, at `O(n1 * n2)` per call. Useful as the probe of
/// non-local oracles and as a brute-force reference for the local ones.
pub struct FullRescoreProbe<'a, O: ?Sized> {
    oracle: &'a O,
    img: &'a GrayImage,
    base: f64,
}

impl<'a, O: ModelOracle + ?Sized> FullRescoreProbe<'a, O> {
    pub fn new(oracle: &'a O, img: &'a GrayImage) -> Self {
        Self { oracle, img, base: oracle.score(img) }
    }
}

impl<O: ModelOracle + ?Sized> PixelProbe for FullRescoreProbe<'_, O> {
    fn base_score(&self) -> f64 {
        self.base
    }

    fn score_with_pixel(&self, row: usize, col: usize, value: u8) -> f64 {
        if self.img.get(row, col) == value {
            return self.base;
        }
        self.oracle.score(&self.img.with_pixel(row, col, value))
    }
}

/// Closed set of the built-in oracles, for callers that pick one at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum Oracle {
    FilterLogit(FilterLogitOracle),
    LinearResidual(LinearResidualOracle),
    Polynomial(PixelPolynomialOracle),
}

impl Oracle {
    /// Short stable identifier used in reports and file headers.
    pub fn kind(&self) -> &'static str {
        match self {
            Oracle::FilterLogit(_) => FilterLogitOracle::KIND,
            Oracle::LinearResidual(_) => LinearResidualOracle::KIND,
            Oracle::Polynomial(_) => PixelPolynomialOracle::KIND,
        }
    }
}

pub enum OracleProbe<'a> {
    FilterLogit(FilterLogitProbe<'a>),
    LinearResidual(LinearResidualProbe<'a>),
    Polynomial(PolynomialProbe<'a>),
}

impl PixelProbe for OracleProbe<'_> {
    fn base_score(&self) -> f64 {
        match self {
            OracleProbe::FilterLogit(p) => p.base_score(),
            OracleProbe::LinearResidual(p) => p.base_score(),
            OracleProbe::Polynomial(p) => p.base_score(),
        }
    }

    fn score_with_pixel(&self, row: usize, col: usize, value: u8) -> f64 {
        match self {
            OracleProbe::FilterLogit(p) => p.score_with_pixel(row, col, value),
            OracleProbe::LinearResidual(p) => p.score_with_pixel(row, col, value),
            OracleProbe::Polynomial(p) => p.score_with_pixel(row, col, value),
        }
    }
}

impl ModelOracle for Oracle {
    type Probe<'a> = OracleProbe<'a>;

    fn score(&self, img: &GrayImage) -> f64 {
        match self {
            Oracle::FilterLogit(o) => o.score(img),
            Oracle::LinearResidual(o) => o.score(img),
            Oracle::Polynomial(o) => o.score(img),
        }
    }

    fn probe<'a>(&'a self, img: &'a GrayImage) -> OracleProbe<'a> {
        match self {
            Oracle::FilterLogit(o) => OracleProbe::FilterLogit(o.probe(img)),
            Oracle::LinearResidual(o) => OracleProbe::LinearResidual(o.probe(img)),
            Oracle::Polynomial(o) => OracleProbe::Polynomial(o.probe(img)),
        }
    }
}

impl From<FilterLogitOracle> for Oracle {
    fn from(o: FilterLogitOracle) -> Self {
        Oracle::FilterLogit(o)
    }
}

impl From<LinearResidualOracle> for Oracle {
    fn from(o: LinearResidualOracle) -> Self {
        Oracle::LinearResidual(o)
    }
}

impl From<PixelPolynomialOracle> for Oracle {
    fn from(o: PixelPolynomialOracle) -> Self {
        Oracle::Polynomial(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{synth_cover, TextureSpec};

    #[test]
    fn checked_rescoring_rejects_bad_edits() {
        let img = GrayImage::filled(6, 5, 10).unwrap();
        let oracle = PixelPolynomialOracle::quadratic((1, 1), 1.0, 0.0, 0.0);
        assert!(matches!(score_with_pixel(&oracle, &img, 5, 0, 3), Err(OracleError::OutOfBounds { .. })));
        assert!(matches!(score_with_pixel(&oracle, &img, 0, 6, 3), Err(OracleError::OutOfBounds { .. })));
        assert_eq!(score_with_pixel(&oracle, &img, 0, 0, 256), Err(OracleError::BadIntensity(256)));
        assert_eq!(score_with_pixel(&oracle, &img, 0, 0, -1), Err(OracleError::BadIntensity(-1)));
        assert_eq!(score_with_pixel(&oracle, &img, 1, 1, 3), Ok(9.0));
    }

    #[test]
    fn enum_dispatch_matches_concrete_oracles() {
        let img = synth_cover(TextureSpec::SmoothedNoise { kernel: 3 }, 12, 10, 2).unwrap();
        let concrete = FilterLogitOracle::default();
        let wrapped = Oracle::from(concrete.clone());
        assert_eq!(wrapped.score(&img), concrete.score(&img));
        assert_eq!(wrapped.probe(&img).score_with_pixel(3, 4, 9), concrete.probe(&img).score_with_pixel(3, 4, 9));
        assert_eq!(wrapped.kind(), "filter-logit");
    }

    #[test]
    fn full_rescore_probe_is_a_valid_reference() {
        let img = synth_cover(TextureSpec::SmoothedNoise { kernel: 1 }, 8, 8, 3).unwrap();
        let oracle = FilterLogitOracle::default();
        let probe = FullRescoreProbe::new(&oracle, &img);
        assert_eq!(probe.base_score(), oracle.score(&img));
        assert_eq!(probe.score_with_pixel(2, 2, 40), oracle.score(&img.with_pixel(2, 2, 40)));
    }
}
