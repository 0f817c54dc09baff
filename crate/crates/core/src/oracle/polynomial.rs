use alloc::vec;
use alloc::vec::Vec;

use super::{ModelOracle, PixelProbe};
use crate::image::GrayImage;

/// Test oracle: a polynomial in a single pixel's intensity.
///
/// `coeffs[k]` multiplies `x^k`, where `x` is the value at `target`. The
/// quadratic `a x^2 + b x + c` is built with [`PixelPolynomialOracle::quadratic`].
#[derive(Clone, Debug, PartialEq)]
pub struct PixelPolynomialOracle {
    pub target: (usize, usize),
    pub coeffs: Vec<f64>,
}

impl PixelPolynomialOracle {
    pub const KIND: &'static str = "pixel-polynomial";

    pub fn new(target: (usize, usize), coeffs: Vec<f64>) -> Self {
        Self { target, coeffs }
    }

    pub fn quadratic(target: (usize, usize), a: f64, b: f64, c: f64) -> Self {
        Self::new(target, vec![c, b, a])
    }

    /// Polynomial value at intensity `x` (Horner).
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Analytic second derivative at intensity `x`.
    pub fn second_derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + (k * (k - 1)) as f64 * c)
    }
}

impl ModelOracle for PixelPolynomialOracle {
    type Probe<'a> = PolynomialProbe<'a>;

    fn score(&self, img: &GrayImage) -> f64 {
        let (r, c) = self.target;
        self.eval(img.get(r, c) as f64)
    }

    fn probe<'a>(&'a self, img: &'a GrayImage) -> PolynomialProbe<'a> {
        PolynomialProbe { oracle: self, base: self.score(img) }
    }
}

pub struct PolynomialProbe<'a> {
    oracle: &'a PixelPolynomialOracle,
    base: f64,
}

impl PixelProbe for PolynomialProbe<'_> {
    fn base_score(&self) -> f64 {
        self.base
    }

    fn score_with_pixel(&self, row: usize, col: usize, value: u8) -> f64 {
        if (row, col) == self.oracle.target {
            self.oracle.eval(value as f64)
        } else {
            self.base
        }
    }
}
