//! Desk-scale detectability evaluation.
//!
//! A logistic detector over residual-histogram features stands in for a full
//! steganalyzer. [`run_sweep`] embeds every cover for each (cost method,
//! filter size, payload, seed) configuration, trains the detector on a
//! cover-disjoint training split and reports the detection error
//! `P_E = (P_FA + P_MD) / 2` on the test split.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cost::{cost_from_sensitivity, hill_cost, second_derivative_map, CostMap, SensitivityMap};
use crate::embed::{simulate_embedding, PayloadSpec, Rule, LOG2_3};
use crate::error::EvalError;
use crate::features::{extract_features, DEFAULT_THRESHOLD};
use crate::image::{synth_cover, GrayImage, TextureSpec};
use crate::logistic::{fit_paired, LogisticModel, SgdOptions};
use crate::oracle::{train_linear_oracle, Oracle, TrainedOracle};
use crate::par::map_indexed;
use crate::rng::{derive_seed, SplitMix64};

pub const REPORT_VERSION: u32 = 1;
pub const MIN_SWEEP_COVERS: usize = 40;

/// Logistic detector over residual features.
pub type DetectorModel = LogisticModel;

/// Steganalysis features of an image (the trainable oracle's feature map).
pub fn image_features(img: &GrayImage) -> Vec<f64> {
    extract_features(img, DEFAULT_THRESHOLD)
}

pub fn train_detector(
    cover_features: &[Vec<f64>],
    stego_features: &[Vec<f64>],
    opts: &SgdOptions,
) -> Result<DetectorModel, EvalError> {
    if cover_features.is_empty() || stego_features.is_empty() {
        return Err(EvalError::Empty("training"));
    }
    if cover_features.len() != stego_features.len() {
        return Err(EvalError::Unpaired);
    }
    Ok(fit_paired(cover_features, stego_features, opts)?.model)
}

/// False-alarm and missed-detection rates of a detector on held-out sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionRates {
    pub false_alarm: f64,
    pub missed_detection: f64,
}

impl DetectionRates {
    pub fn error(&self) -> f64 {
        0.5 * (self.false_alarm + self.missed_detection)
    }
}

pub fn detection_rates(
    model: &DetectorModel,
    cover_features: &[Vec<f64>],
    stego_features: &[Vec<f64>],
) -> Result<DetectionRates, EvalError> {
    if cover_features.is_empty() {
        return Err(EvalError::Empty("cover"));
    }
    if stego_features.is_empty() {
        return Err(EvalError::Empty("stego"));
    }
    let false_alarms = cover_features.iter().filter(|f| model.classify(f)).count();
    let misses = stego_features.iter().filter(|f| !model.classify(f)).count();
    Ok(DetectionRates {
        false_alarm: false_alarms as f64 / cover_features.len() as f64,
        missed_detection: misses as f64 / stego_features.len() as f64,
    })
}

/// `P_E = (P_FA + P_MD) / 2` at threshold 0.5, ties classified as cover.
pub fn detection_error(
    model: &DetectorModel,
    cover_features: &[Vec<f64>],
    stego_features: &[Vec<f64>],
) -> Result<f64, EvalError> {
    Ok(detection_rates(model, cover_features, stego_features)?.error())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CostMethod {
    /// Oracle curvature cost.
    Proposed,
    Hill,
}

impl CostMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CostMethod::Proposed => "proposed",
            CostMethod::Hill => "hill",
        }
    }
}

impl fmt::Display for CostMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostMethod {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(CostMethod::Proposed),
            "hill" => Ok(CostMethod::Hill),
            _ => Err(EvalError::Config("cost method must be `proposed` or `hill`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Split {
    /// Seeded random split with this many training covers.
    Random { train_count: usize },
    /// Explicit cover indices.
    Explicit { train: Vec<usize>, test: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub covers: Vec<GrayImage>,
    pub oracle: Oracle,
    /// Free-form label recorded with every proposed-cost record.
    pub oracle_id: String,
    pub methods: Vec<CostMethod>,
    pub filter_sizes: Vec<usize>,
    pub payloads: Vec<f64>,
    pub seeds: Vec<u64>,
    pub split: Split,
    pub rule: Rule,
    /// Detector training options; the seed field is replaced per record.
    pub detector: SgdOptions,
    /// Monotonic clock in seconds. When set, records carry their wall time,
    /// which makes reports differ between runs.
    pub clock: Option<fn() -> f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub method: CostMethod,
    pub oracle_id: Option<String>,
    /// Average filter size; `None` for HILL, whose filters are fixed.
    pub filter_size: Option<usize>,
    pub payload: f64,
    pub rule: Rule,
    pub seed: u64,
    pub split_seed: u64,
    pub embed_seed: u64,
    pub train_seed: u64,
    pub detection_error: f64,
    pub false_alarm: f64,
    pub missed_detection: f64,
    /// Mean fraction of pixels changed over all covers.
    pub change_rate: f64,
    pub elapsed_seconds: Option<f64>,
}

/// Parameters of a sweep that are not the covers themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub cover_count: usize,
    pub oracle_kind: String,
    pub oracle_id: String,
    pub methods: Vec<CostMethod>,
    pub filter_sizes: Vec<usize>,
    pub payloads: Vec<f64>,
    pub seeds: Vec<u64>,
    pub train_count: usize,
    pub test_count: usize,
    pub rule: Rule,
    pub detector_epochs: usize,
    pub detector_rate: f64,
    pub detector_l2: f64,
    pub feature_threshold: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub version: u32,
    pub config: SweepSummary,
    pub records: Vec<SweepRecord>,
}

impl ExperimentReport {
    /// Records matching a method, filter size and payload, in seed order.
    pub fn select(&self, method: CostMethod, filter_size: Option<usize>, payload: f64) -> Vec<&SweepRecord> {
        self.records
            .iter()
            .filter(|r| r.method == method && r.filter_size == filter_size && r.payload == payload)
            .collect()
    }

    /// Mean detection error over seeds for one configuration.
    pub fn mean_error(&self, method: CostMethod, filter_size: Option<usize>, payload: f64) -> Option<f64> {
        let rs = self.select(method, filter_size, payload);
        if rs.is_empty() {
            None
        } else {
            Some(rs.iter().map(|r| r.detection_error).sum::<f64>() / rs.len() as f64)
        }
    }
}

fn resolve_split(split: &Split, n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    match split {
        Split::Random { train_count } => {
            if *train_count == 0 || *train_count >= n {
                return Err(EvalError::Split("train count must leave both sides nonempty"));
            }
            let mut order: Vec<usize> = (0..n).collect();
            SplitMix64::new(seed).shuffle(&mut order);
            let test = order.split_off(*train_count);
            Ok((order, test))
        }
        Split::Explicit { train, test } => {
            if train.is_empty() || test.is_empty() {
                return Err(EvalError::Split("train and test must be nonempty"));
            }
            let mut seen = alloc::vec![0u8; n];
            for &i in train {
                if i >= n {
                    return Err(EvalError::Split("cover index out of range"));
                }
                seen[i] |= 1;
            }
            for &i in test {
                if i >= n {
                    return Err(EvalError::Split("cover index out of range"));
                }
                if seen[i] & 1 != 0 {
                    return Err(EvalError::Split("a cover appears in both train and test"));
                }
                seen[i] |= 2;
            }
            Ok((train.clone(), test.clone()))
        }
    }
}

fn validate(config: &SweepConfig) -> Result<(), EvalError> {
    if config.covers.len() < MIN_SWEEP_COVERS {
        return Err(EvalError::TooFewCovers { min: MIN_SWEEP_COVERS, actual: config.covers.len() });
    }
    if config.methods.is_empty() {
        return Err(EvalError::Config("no cost methods"));
    }
    if config.payloads.is_empty() {
        return Err(EvalError::Config("no payloads"));
    }
    if config.seeds.is_empty() {
        return Err(EvalError::Config("no seeds"));
    }
    if config.payloads.iter().any(|a| !(0.0..=LOG2_3).contains(a)) {
        return Err(EvalError::Config("payloads must lie in [0, log2 3]"));
    }
    if config.methods.contains(&CostMethod::Proposed) {
        if config.filter_sizes.is_empty() {
            return Err(EvalError::Config("proposed cost needs at least one filter size"));
        }
        if config.filter_sizes.iter().any(|&k| k == 0 || k.is_multiple_of(2)) {
            return Err(EvalError::Config("filter sizes must be odd and positive"));
        }
    }
    Ok(())
}

struct Prepared {
    /// Per-cover curvature maps, present when the proposed cost is swept.
    sensitivities: Option<Vec<SensitivityMap>>,
    hill: Option<Vec<CostMap>>,
    cover_features: Vec<Vec<f64>>,
}

fn prepare(config: &SweepConfig) -> Prepared {
    let covers = &config.covers;
    let sensitivities = config
        .methods
        .contains(&CostMethod::Proposed)
        .then(|| map_indexed(covers.len(), |i| second_derivative_map(&config.oracle, &covers[i])));
    let hill = config
        .methods
        .contains(&CostMethod::Hill)
        .then(|| map_indexed(covers.len(), |i| hill_cost(&covers[i])));
    let cover_features = map_indexed(covers.len(), |i| image_features(&covers[i]));
    Prepared { sensitivities, hill, cover_features }
}

fn gather(features: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| features[i].clone()).collect()
}

/// Runs every configuration of the sweep. Output is independent of thread
/// count; records come back ordered by (method, filter size, payload, seed).
pub fn run_sweep(config: &SweepConfig) -> Result<ExperimentReport, EvalError> {
    validate(config)?;
    let n = config.covers.len();
    let prepared = prepare(config);

    let mut settings: Vec<(CostMethod, Option<usize>)> = Vec::new();
    for &method in &config.methods {
        match method {
            CostMethod::Proposed => settings.extend(config.filter_sizes.iter().map(|&k| (method, Some(k)))),
            CostMethod::Hill => settings.push((method, None)),
        }
    }
    settings.sort();
    settings.dedup();
    let mut payloads = config.payloads.clone();
    payloads.sort_by(f64::total_cmp);
    payloads.dedup();
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();

    let mut records = Vec::new();
    let mut summary_split = (0, 0);
    for &(method, filter_size) in &settings {
        let costs: Vec<CostMap> = match method {
            CostMethod::Proposed => {
                let k = filter_size.expect("proposed settings carry a filter size");
                let maps = prepared.sensitivities.as_ref().expect("prepared for proposed");
                let built = map_indexed(n, |i| cost_from_sensitivity(&maps[i], &config.covers[i], k));
                built.into_iter().collect::<Result<_, _>>()?
            }
            CostMethod::Hill => prepared.hill.clone().expect("prepared for hill"),
        };
        for &alpha in &payloads {
            for &seed in &seeds {
                let started = config.clock.map(|c| c());
                let split_seed = derive_seed(seed, 1);
                let embed_seed = derive_seed(seed, 2);
                let train_seed = derive_seed(seed, 3);
                let (train, test) = resolve_split(&config.split, n, split_seed)?;
                summary_split = (train.len(), test.len());

                let outcomes = map_indexed(n, |i| {
                    let cover = &config.covers[i];
                    let payload = PayloadSpec::from_relative(alpha, cover.len())
                        .and_then(|m| simulate_embedding(cover, &costs[i], m, config.rule, derive_seed(embed_seed, i as u64)));
                    payload.map(|o| (image_features(&o.stego), o.pattern.change_count() as f64 / cover.len() as f64))
                });
                let mut stego_features = Vec::with_capacity(n);
                let mut change_rate = 0.0;
                for (i, outcome) in outcomes.into_iter().enumerate() {
                    let (f, rate) = outcome.map_err(|source| EvalError::Embed { cover: i, source })?;
                    stego_features.push(f);
                    change_rate += rate;
                }
                change_rate /= n as f64;

                let opts = SgdOptions { seed: train_seed, ..config.detector };
                let model = train_detector(
                    &gather(&prepared.cover_features, &train),
                    &gather(&stego_features, &train),
                    &opts,
                )?;
                let rates = detection_rates(
                    &model,
                    &gather(&prepared.cover_features, &test),
                    &gather(&stego_features, &test),
                )?;
                records.push(SweepRecord {
                    method,
                    oracle_id: (method == CostMethod::Proposed).then(|| config.oracle_id.clone()),
                    filter_size,
                    payload: alpha,
                    rule: config.rule,
                    seed,
                    split_seed,
                    embed_seed,
                    train_seed,
                    detection_error: rates.error(),
                    false_alarm: rates.false_alarm,
                    missed_detection: rates.missed_detection,
                    change_rate,
                    elapsed_seconds: config.clock.zip(started).map(|(c, t0)| c() - t0),
                });
            }
        }
    }

    let config_summary = SweepSummary {
        cover_count: n,
        oracle_kind: String::from(config.oracle.kind()),
        oracle_id: config.oracle_id.clone(),
        methods: {
            let mut m = config.methods.clone();
            m.sort();
            m.dedup();
            m
        },
        filter_sizes: {
            let mut k = config.filter_sizes.clone();
            k.sort_unstable();
            k.dedup();
            k
        },
        payloads,
        seeds,
        train_count: summary_split.0,
        test_count: summary_split.1,
        rule: config.rule,
        detector_epochs: config.detector.epochs,
        detector_rate: config.detector.rate,
        detector_l2: config.detector.l2,
        feature_threshold: DEFAULT_THRESHOLD,
    };
    Ok(ExperimentReport { version: REPORT_VERSION, config: config_summary, records })
}

/// Texture used by [`desk_corpus`].
///
/// A single roughness level: with a mix of roughness levels the variation
/// between covers swamps the embedding signal in the residual histograms and
/// the linear detector cannot see HILL stegos at any payload.
pub const DESK_TEXTURE: TextureSpec = TextureSpec::SmoothedNoise { kernel: 15 };

/// Synthetic cover corpus: `count` independent [`DESK_TEXTURE`] images.
pub fn desk_corpus(count: usize, side: usize, seed: u64) -> Result<Vec<GrayImage>, crate::error::ImageError> {
    (0..count)
        .map(|i| synth_cover(DESK_TEXTURE, side, side, derive_seed(seed, i as u64)))
        .collect()
}

/// Trains a residual oracle to separate covers from HILL-embedded stegos.
pub fn train_oracle_on_hill(
    covers: &[GrayImage],
    alpha: f64,
    rule: Rule,
    opts: &SgdOptions,
) -> Result<TrainedOracle, EvalError> {
    let embed_seed = derive_seed(opts.seed, 0x4849_4c4c);
    let stegos = map_indexed(covers.len(), |i| {
        let cover = &covers[i];
        PayloadSpec::from_relative(alpha, cover.len())
            .and_then(|m| simulate_embedding(cover, &hill_cost(cover), m, rule, derive_seed(embed_seed, i as u64)))
            .map(|o| o.stego)
            .map_err(|source| EvalError::Embed { cover: i, source })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(train_linear_oracle(covers, &stegos, DEFAULT_THRESHOLD, opts)?)
}
