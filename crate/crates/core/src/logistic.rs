//! Logistic regression fitted by seeded stochastic gradient descent.
//!
//! Shared by the trainable oracle and the evaluation detector. Features are
//! standardized internally for conditioning; the fitted weights are folded
//! back so the returned model applies to raw features directly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::OracleError;
use crate::rng::SplitMix64;

/// Numerically stable logistic function.
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Scores at or below this threshold classify as cover.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn zeros(dim: usize) -> Self {
        Self { weights: vec![0.0; dim], bias: 0.0 }
    }

    #[inline]
    pub fn linear(&self, features: &[f64]) -> f64 {
        let mut acc = self.bias;
        for (w, f) in self.weights.iter().zip(features) {
            acc += w * f;
        }
        acc
    }

    #[inline]
    pub fn predict(&self, features: &[f64]) -> f64 {
        logistic(self.linear(features))
    }

    /// `true` means "stego". A score of exactly 0.5 is a cover.
    #[inline]
    pub fn classify(&self, features: &[f64]) -> bool {
        self.predict(features) > DECISION_THRESHOLD
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgdOptions {
    pub epochs: usize,
    pub rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for SgdOptions {
    fn default() -> Self {
        Self { epochs: 60, rate: 0.05, l2: 0.0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub model: LogisticModel,
    /// Fraction of training samples classified correctly.
    pub accuracy: f64,
}

/// Fits cover (label 0) against stego (label 1) features.
///
/// `stegos[k]` must derive from `covers[k]`. Each epoch visits the pairs in a
/// seeded random order and updates on the cover, then on its stego.
pub fn fit_paired(covers: &[Vec<f64>], stegos: &[Vec<f64>], opts: &SgdOptions) -> Result<FitResult, OracleError> {
    if covers.is_empty() || stegos.is_empty() {
        return Err(OracleError::EmptyTrainingSet);
    }
    if covers.len() != stegos.len() {
        return Err(OracleError::UnpairedTrainingSet { covers: covers.len(), stegos: stegos.len() });
    }
    let dim = covers[0].len();
    if covers.iter().chain(stegos).any(|f| f.len() != dim) {
        return Err(OracleError::FeatureLength);
    }
    if covers.iter().chain(stegos).flatten().any(|v| !v.is_finite()) {
        return Err(OracleError::NonFinite);
    }

    let samples = 2 * covers.len();
    let mut mean = vec![0.0; dim];
    for f in covers.iter().chain(stegos) {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= samples as f64);
    let mut scale = vec![0.0; dim];
    for f in covers.iter().chain(stegos) {
        for ((s, v), m) in scale.iter_mut().zip(f).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    // Inverse standard deviation; zero for constant features so they drop out.
    for s in &mut scale {
        let sd = libm::sqrt(*s / samples as f64);
        *s = if sd > 1e-12 { 1.0 / sd } else { 0.0 };
    }
    let standardize = |f: &[f64], out: &mut [f64]| {
        for k in 0..dim {
            out[k] = (f[k] - mean[k]) * scale[k];
        }
    };

    let mut std_model = LogisticModel::zeros(dim);
    let mut order: Vec<usize> = (0..covers.len()).collect();
    let mut rng = SplitMix64::new(opts.seed);
    let mut z = vec![0.0; dim];
    for _ in 0..opts.epochs {
        rng.shuffle(&mut order);
        for &k in &order {
            for (features, label) in [(&covers[k], 0.0), (&stegos[k], 1.0)] {
                standardize(features, &mut z);
                let err = std_model.predict(&z) - label;
                for (w, zi) in std_model.weights.iter_mut().zip(&z) {
                    *w -= opts.rate * (err * zi + opts.l2 * *w);
                }
                std_model.bias -= opts.rate * err;
            }
        }
    }

    let mut model = LogisticModel::zeros(dim);
    model.bias = std_model.bias;
    for k in 0..dim {
        model.weights[k] = std_model.weights[k] * scale[k];
        model.bias -= model.weights[k] * mean[k];
    }
    let correct = covers.iter().filter(|f| !model.classify(f)).count()
        + stegos.iter().filter(|f| model.classify(f)).count();
    Ok(FitResult { model, accuracy: correct as f64 / samples as f64 })
}
