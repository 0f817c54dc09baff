//! Steganographic embedding costs derived from a steganalyzer's curvature.
//!
//! The cost of changing a pixel is the clamped second derivative of a model
//! oracle's score with respect to that pixel, estimated with a five-point
//! stencil, then scaled and smoothed ([`cost`]). Costs are turned into ternary
//! change probabilities under a payload constraint and embedding is simulated
//! by sampling ([`embed`]). [`eval`] measures detectability at desk scale.
//!
//! The crate is `no_std` with `alloc`. The `parallel` feature spreads per-pixel
//! and per-cover work over a rayon pool without changing any result.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cost;
pub mod embed;
pub mod error;
pub mod eval;
pub mod features;
pub mod filter;
pub mod image;
pub mod logistic;
pub mod oracle;
mod par;
pub mod rng;

pub use cost::{
    additive_distortion, average_filter, build_cost_map, clamp_negative, hill_cost, scale_linear,
    second_derivative_map, CostMap, SensitivityMap, DEFAULT_FILTER_SIZE, EPS, WET,
};
pub use embed::{
    apply_pattern, capped_probs, expected_distortion, gibbs_probs, pattern_entropy, sample_pattern, solve_lambda,
    ChangeProbabilities, EmbeddingPattern, LambdaSolution, PayloadSpec, Rule,
};
pub use error::{CostError, EmbedError, EvalError, ImageError, OracleError};
pub use image::{synth_cover, GrayImage, TextureSpec};
pub use oracle::{score_with_pixel, FilterLogitOracle, LinearResidualOracle, ModelOracle, Oracle, PixelPolynomialOracle, PixelProbe};
