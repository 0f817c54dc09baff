//! Payload-constrained change probabilities and embedding simulation.
//!
//! Changes are ternary and symmetric: each pixel moves by `+1` or `-1` with
//! the same probability `p` and stays put with probability `1 - 2p`. Two
//! rules map a cost `rho` and a rate parameter `lambda` to `p`:
//!
//! - Gibbs: `p = e^(-lambda rho) / (1 + 2 e^(-lambda rho))`, the minimizer of
//!   expected additive distortion at fixed entropy;
//! - capped-linear: `p = max(1/3 - lambda rho, 0)`.
//!
//! In both cases `lambda` is solved so that the pattern entropy in bits
//! matches the message length. Embedding is simulated by sampling a pattern
//! from the resulting distribution; no message is coded.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cost::CostMap;
use crate::error::EmbedError;
use crate::image::GrayImage;
use crate::par::map_indexed;
use crate::rng::PixelRng;

pub const LOG2_3: f64 = 1.584_962_500_721_156_2;

const MAX_LAMBDA: f64 = 18_446_744_073_709_551_616.0; // 2^64
const MAX_BISECTIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Gibbs,
    Capped,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Gibbs => "gibbs",
            Rule::Capped => "capped",
        }
    }

    /// Change probability of one dry pixel.
    #[inline]
    pub fn p_change(self, rho: f64, lambda: f64) -> f64 {
        match self {
            Rule::Gibbs => {
                let e = libm::exp(-lambda * rho);
                e / (1.0 + 2.0 * e)
            }
            Rule::Capped => (1.0 / 3.0 - lambda * rho).max(0.0),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = EmbedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gibbs" => Ok(Rule::Gibbs),
            "capped" => Ok(Rule::Capped),
            _ => Err(EmbedError::Invalid("rule must be `gibbs` or `capped`")),
        }
    }
}

/// Per-pixel `p(s = +1) = p(s = -1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChangeProbabilities {
    width: usize,
    height: usize,
    p_change: Vec<f64>,
    rule: Rule,
}

impl ChangeProbabilities {
    pub fn new(width: usize, height: usize, p_change: Vec<f64>, rule: Rule) -> Result<Self, EmbedError> {
        if p_change.len() != width * height {
            return Err(EmbedError::Invalid("probability count does not match dimensions"));
        }
        if p_change.iter().any(|p| !(0.0..=1.0 / 3.0).contains(p)) {
            return Err(EmbedError::Invalid("change probabilities must lie in [0, 1/3]"));
        }
        Ok(Self { width, height, p_change, rule })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn p_change(&self) -> &[f64] {
        &self.p_change
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.p_change[row * self.width + col]
    }
}

/// Ternary change matrix `S = Y - X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingPattern {
    width: usize,
    height: usize,
    changes: Vec<i8>,
}

impl EmbeddingPattern {
    pub fn new(width: usize, height: usize, changes: Vec<i8>) -> Result<Self, EmbedError> {
        if changes.len() != width * height {
            return Err(EmbedError::Invalid("change count does not match dimensions"));
        }
        if changes.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(EmbedError::Invalid("changes must be -1, 0 or +1"));
        }
        Ok(Self { width, height, changes })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, changes: alloc::vec![0; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn changes(&self) -> &[i8] {
        &self.changes
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.changes[row * self.width + col]
    }

    pub fn change_count(&self) -> usize {
        self.changes.iter().filter(|&&s| s != 0).count()
    }
}

/// Message length in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayloadSpec {
    bits: f64,
}

impl PayloadSpec {
    /// `m = round(alpha * pixels)` for a relative payload `alpha` in bits per pixel.
    pub fn from_relative(alpha: f64, pixels: usize) -> Result<Self, EmbedError> {
        if !(0.0..=LOG2_3).contains(&alpha) {
            return Err(EmbedError::BadPayload(alpha));
        }
        Ok(Self { bits: libm::round(alpha * pixels as f64) })
    }

    pub fn from_bits(bits: f64) -> Result<Self, EmbedError> {
        if !bits.is_finite() || bits < 0.0 {
            return Err(EmbedError::BadPayload(bits));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> f64 {
        self.bits
    }

    /// Allowed absolute entropy error: `max(1e-3 m, 1e-6)` bits.
    pub fn tolerance(&self) -> f64 {
        (1e-3 * self.bits).max(1e-6)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaSolution {
    pub lambda: f64,
    /// Pattern entropy at `lambda`, in bits.
    pub entropy: f64,
    /// Entropy evaluations spent in bracketing and bisection.
    pub iterations: usize,
}

fn probs_with(rule: Rule, rho: &CostMap, lambda: f64) -> Result<ChangeProbabilities, EmbedError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(EmbedError::NegativeLambda(lambda));
    }
    let (w, h) = (rho.width(), rho.height());
    let rows = map_indexed(h, |row| {
        let costs = &rho.costs()[row * w..(row + 1) * w];
        let wet = &rho.wet()[row * w..(row + 1) * w];
        costs
            .iter()
            .zip(wet)
            .map(|(&c, &is_wet)| if is_wet { 0.0 } else { rule.p_change(c, lambda) })
            .collect::<Vec<f64>>()
    });
    Ok(ChangeProbabilities { width: w, height: h, p_change: rows.concat(), rule })
}

/// Gibbs change probabilities; wet pixels get 0.
pub fn gibbs_probs(rho: &CostMap, lambda: f64) -> Result<ChangeProbabilities, EmbedError> {
    probs_with(Rule::Gibbs, rho, lambda)
}

/// Capped-linear change probabilities; wet pixels get 0.
pub fn capped_probs(rho: &CostMap, lambda: f64) -> Result<ChangeProbabilities, EmbedError> {
    probs_with(Rule::Capped, rho, lambda)
}

pub fn probs(rule: Rule, rho: &CostMap, lambda: f64) -> Result<ChangeProbabilities, EmbedError> {
    probs_with(rule, rho, lambda)
}

/// Entropy in bits of a symmetric ternary variable with change probability `q`.
#[inline]
pub fn ternary_entropy(q: f64) -> f64 {
    let xlog = |x: f64| if x > 0.0 { x * libm::log2(x) } else { 0.0 };
    -2.0 * xlog(q) - xlog(1.0 - 2.0 * q)
}

/// Pairwise summation with a fixed split, so the result depends only on the
/// input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Total pattern entropy in bits under per-pixel independence.
pub fn pattern_entropy(p: &ChangeProbabilities) -> f64 {
    let terms: Vec<f64> = p.p_change.iter().map(|&q| ternary_entropy(q)).collect();
    pairwise_sum(&terms)
}

fn entropy_at(rule: Rule, rho: &CostMap, lambda: f64) -> f64 {
    let w = rho.width();
    let rows = map_indexed(rho.height(), |row| {
        let costs = &rho.costs()[row * w..(row + 1) * w];
        let wet = &rho.wet()[row * w..(row + 1) * w];
        costs
            .iter()
            .zip(wet)
            .map(|(&c, &is_wet)| if is_wet { 0.0 } else { ternary_entropy(rule.p_change(c, lambda)) })
            .collect::<Vec<f64>>()
    });
    pairwise_sum(&rows.concat())
}

/// Solves for the `lambda` whose pattern entropy matches `payload`.
///
/// Entropy is continuous and nonincreasing in `lambda` for both rules. The
/// bracket grows by doubling from 1 (capped at 2^64), then bisection runs for
/// at most 200 steps. A zero payload returns the upper bracket.
pub fn solve_lambda(rho: &CostMap, payload: PayloadSpec, rule: Rule) -> Result<LambdaSolution, EmbedError> {
    let target = payload.bits();
    let tol = payload.tolerance();
    let capacity = rho.dry_count() as f64 * LOG2_3;
    let mut evals = 1;
    let h_max = entropy_at(rule, rho, 0.0);
    if target > h_max + tol {
        let pixels = rho.len().max(1) as f64;
        return Err(EmbedError::Infeasible { requested: target, capacity, max_relative: capacity / pixels });
    }
    if target >= h_max - tol {
        return Ok(LambdaSolution { lambda: 0.0, entropy: h_max, iterations: evals });
    }

    let mut hi = 1.0;
    let mut h_hi = entropy_at(rule, rho, hi);
    evals += 1;
    while h_hi > target {
        if hi >= MAX_LAMBDA {
            if h_hi - target <= tol {
                return Ok(LambdaSolution { lambda: hi, entropy: h_hi, iterations: evals });
            }
            return Err(EmbedError::Bracket { achieved: h_hi, lambda: hi, target });
        }
        hi *= 2.0;
        h_hi = entropy_at(rule, rho, hi);
        evals += 1;
    }
    if target == 0.0 || (h_hi - target).abs() <= tol {
        return Ok(LambdaSolution { lambda: hi, entropy: h_hi, iterations: evals });
    }

    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    let mut best = (hi, h_hi);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let h_mid = entropy_at(rule, rho, mid);
        evals += 1;
        if (h_mid - target).abs() < (best.1 - target).abs() {
            best = (mid, h_mid);
        }
        if (h_mid - target).abs() <= tol {
            return Ok(LambdaSolution { lambda: mid, entropy: h_mid, iterations: evals });
        }
        if h_mid > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(EmbedError::NoConvergence { achieved: best.1, target })
}

/// Samples a pattern: `+1` with probability `p`, `-1` with probability `p`.
///
/// Pixel `(i, j)` uses the draw `PixelRng::new(seed).uniform(i, j)`, so the
/// output does not depend on evaluation order.
pub fn sample_pattern(p: &ChangeProbabilities, seed: u64) -> EmbeddingPattern {
    let rng = PixelRng::new(seed);
    let w = p.width;
    let rows = map_indexed(p.height, |row| {
        p.p_change[row * w..(row + 1) * w]
            .iter()
            .enumerate()
            .map(|(col, &q)| {
                let u = rng.uniform(row, col);
                if u < q {
                    1i8
                } else if u < 2.0 * q {
                    -1
                } else {
                    0
                }
            })
            .collect::<Vec<i8>>()
    });
    EmbeddingPattern { width: p.width, height: p.height, changes: rows.concat() }
}

/// `y = clamp(x + s, 0, 255)`.
pub fn apply_pattern(x: &GrayImage, s: &EmbeddingPattern) -> Result<GrayImage, EmbedError> {
    if x.width() != s.width || x.height() != s.height {
        return Err(EmbedError::DimensionMismatch(x.width(), x.height(), s.width, s.height));
    }
    let pixels = x
        .pixels()
        .iter()
        .zip(&s.changes)
        .map(|(&v, &d)| (v as i16 + d as i16).clamp(0, 255) as u8)
        .collect();
    Ok(GrayImage::new(x.width(), x.height(), pixels).expect("dimensions come from a valid image"))
}

/// `E[D] = sum 2 p_ij rho_ij`.
pub fn expected_distortion(p: &ChangeProbabilities, rho: &CostMap) -> Result<f64, EmbedError> {
    if p.width != rho.width() || p.height != rho.height() {
        return Err(EmbedError::DimensionMismatch(p.width, p.height, rho.width(), rho.height()));
    }
    Ok(p
        .p_change
        .iter()
        .zip(rho.costs())
        .zip(rho.wet())
        .map(|((&q, &c), &wet)| if wet { 0.0 } else { 2.0 * q * c })
        .sum())
}

/// Result of one simulated embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbedOutcome {
    pub stego: GrayImage,
    pub pattern: EmbeddingPattern,
    pub probabilities: ChangeProbabilities,
    pub solution: LambdaSolution,
    pub expected_distortion: f64,
}

/// Solve, sample and apply in one step.
pub fn simulate_embedding(
    cover: &GrayImage,
    rho: &CostMap,
    payload: PayloadSpec,
    rule: Rule,
    seed: u64,
) -> Result<EmbedOutcome, EmbedError> {
    if cover.width() != rho.width() || cover.height() != rho.height() {
        return Err(EmbedError::DimensionMismatch(cover.width(), cover.height(), rho.width(), rho.height()));
    }
    let solution = solve_lambda(rho, payload, rule)?;
    let probabilities = probs(rule, rho, solution.lambda)?;
    let pattern = sample_pattern(&probabilities, seed);
    let stego = apply_pattern(cover, &pattern)?;
    let expected_distortion = expected_distortion(&probabilities, rho)?;
    Ok(EmbedOutcome { stego, pattern, probabilities, solution, expected_distortion })
}
