use alloc::vec::Vec;

use super::{ModelOracle, PixelProbe};
use crate::error::OracleError;
use crate::features::{feature_dim, ResidualHistogram, DEFAULT_THRESHOLD};
use crate::image::GrayImage;
use crate::logistic::{fit_paired, LogisticModel, SgdOptions};

/// Trainable oracle: logistic regression over residual-histogram features.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearResidualOracle {
    threshold: u32,
    model: LogisticModel,
}

impl LinearResidualOracle {
    pub const KIND: &'static str = "linear-residual";

    pub fn new(threshold: u32, weights: Vec<f64>, bias: f64) -> Result<Self, OracleError> {
        let expected = feature_dim(threshold);
        if weights.len() != expected {
            return Err(OracleError::WeightCount { expected, actual: weights.len() });
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(OracleError::NonFinite);
        }
        Ok(Self { threshold, model: LogisticModel { weights, bias } })
    }

    /// All-zero weights: scores `logistic(0) = 0.5` for every image.
    pub fn untrained(threshold: u32) -> Self {
        Self { threshold, model: LogisticModel::zeros(feature_dim(threshold)) }
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn weights(&self) -> &[f64] {
        &self.model.weights
    }

    pub fn bias(&self) -> f64 {
        self.model.bias
    }

    pub fn model(&self) -> &LogisticModel {
        &self.model
    }

    fn score_histogram(&self, hist: &ResidualHistogram, pixels: usize) -> f64 {
        self.model.predict(&hist.normalized(pixels))
    }
}

impl Default for LinearResidualOracle {
    fn default() -> Self {
        Self::untrained(DEFAULT_THRESHOLD)
    }
}

impl ModelOracle for LinearResidualOracle {
    type Probe<'a> = LinearResidualProbe<'a>;

    fn score(&self, img: &GrayImage) -> f64 {
        self.score_histogram(&ResidualHistogram::compute(img, self.threshold), img.len())
    }

    fn probe<'a>(&'a self, img: &'a GrayImage) -> LinearResidualProbe<'a> {
        let hist = ResidualHistogram::compute(img, self.threshold);
        let base = self.score_histogram(&hist, img.len());
        LinearResidualProbe { oracle: self, img, hist, base }
    }
}

pub struct LinearResidualProbe<'a> {
    oracle: &'a LinearResidualOracle,
    img: &'a GrayImage,
    hist: ResidualHistogram,
    base: f64,
}

impl PixelProbe for LinearResidualProbe<'_> {
    fn base_score(&self) -> f64 {
        self.base
    }

    fn score_with_pixel(&self, row: usize, col: usize, value: u8) -> f64 {
        let hist = self.hist.with_pixel(self.img, row, col, value);
        self.oracle.score_histogram(&hist, self.img.len())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedOracle {
    pub oracle: LinearResidualOracle,
    pub accuracy: f64,
}

/// Fits a [`LinearResidualOracle`] on aligned cover/stego pairs (label 0 = cover).
pub fn train_linear_oracle(
    covers: &[GrayImage],
    stegos: &[GrayImage],
    threshold: u32,
    opts: &SgdOptions,
) -> Result<TrainedOracle, OracleError> {
    if covers.is_empty() || stegos.is_empty() {
        return Err(OracleError::EmptyTrainingSet);
    }
    if covers.len() != stegos.len() {
        return Err(OracleError::UnpairedTrainingSet { covers: covers.len(), stegos: stegos.len() });
    }
    let features = |imgs: &[GrayImage]| -> Vec<Vec<f64>> {
        imgs.iter().map(|img| crate::features::extract_features(img, threshold)).collect()
    };
    let fit = fit_paired(&features(covers), &features(stegos), opts)?;
    let oracle = LinearResidualOracle { threshold, model: fit.model };
    Ok(TrainedOracle { oracle, accuracy: fit.accuracy })
}

impl From<LinearResidualOracle> for LogisticModel {
    fn from(o: LinearResidualOracle) -> Self {
        o.model
    }
}
