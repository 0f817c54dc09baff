use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImageError {
    #[error("image is {width}x{height}, both sides must be at least {min}")]
    TooSmall { width: usize, height: usize, min: usize },
    #[error("raster has {actual} bytes, expected {expected}")]
    RasterSize { expected: usize, actual: usize },
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("unknown texture kind `{0}`")]
    UnknownKind(alloc::string::String),
    #[error("invalid texture parameter: {0}")]
    BadParameter(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("pixel ({row}, {col}) is outside a {width}x{height} image")]
    OutOfBounds { row: usize, col: usize, width: usize, height: usize },
    #[error("intensity {0} is outside [0, 255]")]
    BadIntensity(i32),
    #[error("training lists are empty")]
    EmptyTrainingSet,
    #[error("training lists differ in length: {covers} covers vs {stegos} stegos")]
    UnpairedTrainingSet { covers: usize, stegos: usize },
    #[error("feature vectors have inconsistent length")]
    FeatureLength,
    #[error("oracle expects {expected} weights, got {actual}")]
    WeightCount { expected: usize, actual: usize },
    #[error("non-finite oracle parameter")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("average filter size must be odd and positive, got {0}")]
    FilterSize(i64),
    #[error("map dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("pixel ({row}, {col}) changed by {delta}, ternary embedding allows at most 1")]
    NotTernary { row: usize, col: usize, delta: i32 },
    #[error("cost map data is inconsistent: {0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("lambda must be nonnegative and finite, got {0}")]
    NegativeLambda(f64),
    #[error("relative payload {0} is outside [0, log2 3]")]
    BadPayload(f64),
    #[error("payload of {requested} bits exceeds the capacity of {capacity} bits ({max_relative} bpp)")]
    Infeasible { requested: f64, capacity: f64, max_relative: f64 },
    #[error("lambda bracketing failed: entropy {achieved} bits at lambda {lambda}, target {target}")]
    Bracket { achieved: f64, lambda: f64, target: f64 },
    #[error("bisection did not reach tolerance: entropy {achieved} bits, target {target}")]
    NoConvergence { achieved: f64, target: f64 },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("probability data is inconsistent: {0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("empty {0} set")]
    Empty(&'static str),
    #[error("cover and stego lists differ in length")]
    Unpaired,
    #[error("sweep needs at least {min} covers, got {actual}")]
    TooFewCovers { min: usize, actual: usize },
    #[error("train/test split is invalid: {0}")]
    Split(&'static str),
    #[error("sweep configuration: {0}")]
    Config(&'static str),
    #[error("cover {cover}: {source}")]
    Embed { cover: usize, source: EmbedError },
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
