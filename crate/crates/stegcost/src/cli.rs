//! Command-line interface.
//!
//! Exit codes: 2 for argument and configuration errors, 3 for unreadable or
//! unwritable files, 4 for numeric failures such as an infeasible payload.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use stegcost_core::embed::simulate_embedding;
use stegcost_core::eval::{desk_corpus, run_sweep, CostMethod, ExperimentReport};
use stegcost_core::features::{feature_dim, DEFAULT_THRESHOLD};
use stegcost_core::logistic::SgdOptions;
use stegcost_core::oracle::train_linear_oracle;
use stegcost_core::rng::PixelRng;
use stegcost_core::{
    build_cost_map, hill_cost, synth_cover, CostMap, EmbedError, FilterLogitOracle, GrayImage, Oracle, PayloadSpec,
    Rule, TextureSpec, DEFAULT_FILTER_SIZE,
};

use crate::binfmt::{decode_cost, encode_cost, encode_pattern, encode_prob};
use crate::config::{load_corpus, load_oracle_file, pgm_names, ConfigError, SweepFile};
use crate::oracle_file::write_oracle;
use crate::pgm::{load_pgm, save_pgm, PgmFileError};
use crate::report::report_to_json;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERIC, message: message.into() }
    }
}

impl From<PgmFileError> for CliError {
    fn from(e: PgmFileError) -> Self {
        Self { code: EXIT_IO, message: e.to_string() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Invalid(_) => EXIT_CONFIG,
            ConfigError::Io { .. } | ConfigError::Image(_) => EXIT_IO,
            ConfigError::Numeric(_) => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

/// Worker count: a positive number or `auto`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Fixed(n)),
            _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stegcost", version, about = "Steganalyzer-driven embedding costs and embedding simulation")]
pub struct Cli {
    /// Worker threads, or `auto` for one per core. Never changes results.
    #[arg(long, global = true, default_value = "auto")]
    pub threads: Threads,
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a cost map and write it as a COST file.
    Cost(CostArgs),
    /// Simulate embedding a payload into a cover.
    Embed(EmbedArgs),
    /// Run a detection-error sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Train a residual oracle on matching cover and stego directories.
    TrainOracle(TrainArgs),
    /// Write one synthetic cover image.
    Synth(SynthArgs),
    /// Write the synthetic desk corpus into a directory.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Cost method: `proposed` (oracle curvature) or `hill`.
    #[arg(long, default_value = "proposed")]
    pub method: String,
    /// Oracle kind for the proposed cost: `filter-logit` (default) or
    /// `linear-residual`. With `--weights` the kind is read from the file.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Oracle weights file (required for `linear-residual`).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Gain of the filter-logit oracle.
    #[arg(long)]
    pub gain: Option<f64>,
    /// Bias of the filter-logit oracle.
    #[arg(long, allow_hyphen_values = true)]
    pub bias: Option<f64>,
    /// Average filter size (odd).
    #[arg(short = 'k', long = "filter-size", default_value_t = DEFAULT_FILTER_SIZE)]
    pub filter_size: usize,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Stego image output.
    #[arg(long)]
    pub output: PathBuf,
    /// Relative payload in bits per pixel.
    #[arg(long, allow_hyphen_values = true)]
    pub payload: f64,
    /// Probability rule: `gibbs` or `capped`.
    #[arg(long, default_value = "gibbs")]
    pub rule: String,
    /// Precomputed COST file; overrides the oracle options.
    #[arg(long)]
    pub cost: Option<PathBuf>,
    /// Write the change pattern (PATT).
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// Write the change probabilities (PROB).
    #[arg(long)]
    pub probs: Option<PathBuf>,
    /// Write run metadata as JSON.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report output (JSON).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub covers: PathBuf,
    #[arg(long)]
    pub stegos: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Residual truncation threshold T.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: u32,
    #[arg(long, default_value_t = SgdOptions::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = SgdOptions::default().rate)]
    pub rate: f64,
    #[arg(long, default_value_t = SgdOptions::default().l2)]
    pub l2: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// `flat:N`, `gradient`, `smoothed-noise:K` or `two-region`.
    #[arg(long)]
    pub texture: String,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Runs a parsed command and returns its stdout lines.
pub fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Threads::Fixed(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Cost(a) => cmd_cost(a),
        Command::Embed(a) => cmd_embed(a, cli.seed),
        Command::Sweep(a) => cmd_sweep(a, cli.seed),
        Command::TrainOracle(a) => cmd_train(a, cli.seed),
        Command::Synth(a) => cmd_synth(a, cli.seed),
        Command::Corpus(a) => cmd_corpus(a, cli.seed),
    })
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn check_input(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::io(path, "no such file"))
    }
}

fn parse_rule(s: &str) -> Result<Rule, CliError> {
    s.parse().map_err(|_| CliError::config(format!("unknown rule `{s}`, expected `gibbs` or `capped`")))
}

/// Settings that determine a cost map, in key=value form.
struct CostPlan {
    method: CostMethod,
    oracle: Option<Oracle>,
    k: usize,
    fields: Vec<(&'static str, String)>,
}

impl OracleArgs {
    fn plan(&self) -> Result<CostPlan, CliError> {
        let method: CostMethod = self.method.parse().map_err(|_| {
            CliError::config(format!("unknown method `{}`, expected `proposed` or `hill`", self.method))
        })?;
        if method == CostMethod::Hill {
            return Ok(CostPlan { method, oracle: None, k: 0, fields: vec![("method", "hill".into())] });
        }
        if self.filter_size.is_multiple_of(2) {
            return Err(CliError::config(format!("filter size {} must be odd", self.filter_size)));
        }
        let oracle: Oracle = match (self.oracle.as_deref(), &self.weights) {
            (kind, Some(path)) => {
                let o = load_oracle_file(path).map_err(|e| CliError::config(e.to_string()))?;
                if let Some(kind) = kind.filter(|&k| k != o.kind()) {
                    return Err(CliError::config(format!("{} holds a {} oracle, not {kind}", path.display(), o.kind())));
                }
                o
            }
            (None | Some(FilterLogitOracle::KIND), None) => {
                let d = FilterLogitOracle::default();
                FilterLogitOracle::new(self.gain.unwrap_or(d.gain), self.bias.unwrap_or(d.bias)).into()
            }
            (Some("linear-residual"), None) => {
                return Err(CliError::config("the linear-residual oracle needs --weights"));
            }
            (Some(other), None) => return Err(CliError::config(format!("unknown oracle `{other}`"))),
        };
        let mut fields = vec![("method", "proposed".to_string()), ("oracle", oracle.kind().to_string())];
        if let Oracle::FilterLogit(o) = &oracle {
            fields.push(("gain", format!("{:?}", o.gain)));
            fields.push(("bias", format!("{:?}", o.bias)));
        }
        if let Some(p) = &self.weights {
            fields.push(("weights", p.display().to_string()));
        }
        fields.push(("k", self.filter_size.to_string()));
        Ok(CostPlan { method, oracle: Some(oracle), k: self.filter_size, fields })
    }
}

impl CostPlan {
    fn compute(&self, img: &GrayImage) -> Result<CostMap, CliError> {
        match (&self.method, &self.oracle) {
            (CostMethod::Proposed, Some(o)) => build_cost_map(o, img, self.k).map_err(|e| CliError::numeric(e.to_string())),
            _ => Ok(hill_cost(img)),
        }
    }
}

fn line(fields: &[(&str, String)]) -> String {
    fields.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

fn cmd_cost(a: &CostArgs) -> Result<Vec<String>, CliError> {
    let plan = a.oracle.plan()?;
    check_input(&a.input)?;
    let img = load_pgm(&a.input)?;
    let rho = plan.compute(&img)?;
    write_file(&a.output, encode_cost(&rho))?;
    let s = rho.summary();
    let mut fields = vec![("width", img.width().to_string()), ("height", img.height().to_string())];
    fields.extend(plan.fields.iter().cloned());
    fields.extend([
        ("min", format!("{:?}", s.min)),
        ("max", format!("{:?}", s.max)),
        ("mean", format!("{:?}", s.mean)),
        ("wet", s.wet_count.to_string()),
        ("pixels", s.pixel_count.to_string()),
    ]);
    Ok(vec![line(&fields)])
}

fn cmd_embed(a: &EmbedArgs, seed: u64) -> Result<Vec<String>, CliError> {
    let rule = parse_rule(&a.rule)?;
    if !(a.payload.is_finite() && a.payload >= 0.0) {
        return Err(CliError::config(format!("payload {} must be a nonnegative number", a.payload)));
    }
    let plan = if a.cost.is_some() { None } else { Some(a.oracle.plan()?) };
    check_input(&a.input)?;
    let cover = load_pgm(&a.input)?;
    let (rho, mut source) = match (&a.cost, &plan) {
        (Some(path), _) => {
            let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
            let rho = decode_cost(&bytes).map_err(|e| CliError::io(path, e))?;
            (rho, vec![("cost", path.display().to_string())])
        }
        (None, Some(plan)) => (plan.compute(&cover)?, plan.fields.clone()),
        (None, None) => unreachable!(),
    };
    // Relative payloads above log2(3) are not rejected up front: the solver
    // reports them as infeasible together with the actual capacity.
    let bits = (a.payload * cover.len() as f64).round();
    let payload = PayloadSpec::from_bits(bits).map_err(|e| CliError::config(e.to_string()))?;
    let outcome = simulate_embedding(&cover, &rho, payload, rule, seed).map_err(|e| match e {
        EmbedError::Infeasible { requested, capacity, max_relative } => CliError::numeric(format!(
            "payload of {requested} bits is infeasible: capacity is {capacity} bits, max feasible payload is {max_relative} bpp"
        )),
        EmbedError::DimensionMismatch(..) => CliError::config(e.to_string()),
        other => CliError::numeric(other.to_string()),
    })?;

    save_pgm(&a.output, &outcome.stego).map_err(|e| CliError::io(&a.output, e))?;
    if let Some(p) = &a.pattern {
        write_file(p, encode_pattern(&outcome.pattern))?;
    }
    if let Some(p) = &a.probs {
        write_file(p, encode_prob(&outcome.probabilities))?;
    }
    let changes = outcome.pattern.change_count();
    if let Some(p) = &a.meta {
        let cost: BTreeMap<&str, &String> = source.iter().map(|(k, v)| (*k, v)).collect();
        let meta = json!({
            "input": a.input.display().to_string(),
            "output": a.output.display().to_string(),
            "width": cover.width(),
            "height": cover.height(),
            "payload": a.payload,
            "message_bits": payload.bits(),
            "tolerance_bits": payload.tolerance(),
            "rule": rule.as_str(),
            "seed": seed,
            "sampler": PixelRng::NAME,
            "cost": cost,
            "lambda": outcome.solution.lambda,
            "entropy": outcome.solution.entropy,
            "solver_evaluations": outcome.solution.iterations,
            "expected_distortion": outcome.expected_distortion,
            "change_count": changes,
            "wet_count": rho.len() - rho.dry_count(),
        });
        let mut text = serde_json::to_string_pretty(&meta).expect("finite metadata");
        text.push('\n');
        write_file(p, text)?;
    }
    let mut fields = vec![
        ("width", cover.width().to_string()),
        ("height", cover.height().to_string()),
        ("payload", format!("{:?}", a.payload)),
        ("bits", format!("{bits:?}")),
        ("rule", rule.to_string()),
        ("seed", seed.to_string()),
    ];
    fields.append(&mut source);
    fields.extend([
        ("lambda", format!("{:?}", outcome.solution.lambda)),
        ("entropy", format!("{:?}", outcome.solution.entropy)),
        ("expected_distortion", format!("{:?}", outcome.expected_distortion)),
        ("changes", changes.to_string()),
    ]);
    Ok(vec![line(&fields)])
}

/// Mean P_E per (method, k) row and payload column.
pub fn format_table(report: &ExperimentReport) -> Vec<String> {
    let payloads = &report.config.payloads;
    let mut rows: Vec<(CostMethod, Option<usize>)> = report.records.iter().map(|r| (r.method, r.filter_size)).collect();
    rows.dedup();
    let mut out = vec![format!(
        "{:<9} {:>3} {}",
        "method",
        "k",
        payloads.iter().map(|a| format!("{:>9}", format!("a={a}"))).collect::<String>()
    )];
    for (method, k) in rows {
        let cells: String = payloads
            .iter()
            .map(|&a| match report.mean_error(method, k, a) {
                Some(pe) => format!("{pe:>9.4}"),
                None => format!("{:>9}", "-"),
            })
            .collect();
        let k = k.map_or("-".to_string(), |k| k.to_string());
        out.push(format!("{:<9} {:>3} {cells}", method.as_str(), k));
    }
    out
}

fn cmd_sweep(a: &SweepArgs, seed: u64) -> Result<Vec<String>, CliError> {
    let file = SweepFile::load(&a.config).map_err(|e| match e {
        ConfigError::Io { .. } => CliError::from(e),
        other => CliError::config(other.to_string()),
    })?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let config = file.build(base, seed)?;
    let report = run_sweep(&config).map_err(|e| {
        use stegcost_core::EvalError as E;
        match e {
            E::Embed { .. } | E::Cost(_) | E::Oracle(_) => CliError::numeric(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    })?;
    write_file(&a.output, report_to_json(&report))?;
    let mut out = format_table(&report);
    out.push(line(&[
        ("records", report.records.len().to_string()),
        ("covers", report.config.cover_count.to_string()),
        ("train", report.config.train_count.to_string()),
        ("test", report.config.test_count.to_string()),
        ("oracle", report.config.oracle_kind.clone()),
        ("rule", report.config.rule.to_string()),
        ("report", a.output.display().to_string()),
    ]));
    Ok(out)
}

fn cmd_train(a: &TrainArgs, seed: u64) -> Result<Vec<String>, CliError> {
    let cover_names = pgm_names(&a.covers)?;
    let stego_names = pgm_names(&a.stegos)?;
    if cover_names.is_empty() {
        return Err(CliError::config(format!("{}: no .pgm files", a.covers.display())));
    }
    if cover_names != stego_names {
        let missing = cover_names
            .iter()
            .find(|n| !stego_names.contains(n))
            .or_else(|| stego_names.iter().find(|n| !cover_names.contains(n)))
            .cloned()
            .unwrap_or_default();
        return Err(CliError::config(format!(
            "{} and {} do not hold the same file names (first mismatch: {missing})",
            a.covers.display(),
            a.stegos.display()
        )));
    }
    let covers = load_corpus(&a.covers)?;
    let stegos = load_corpus(&a.stegos)?;
    for (name, (c, s)) in cover_names.iter().zip(covers.iter().zip(&stegos)) {
        if c.same_shape(s).is_err() {
            return Err(CliError::config(format!("{name}: cover and stego sizes differ")));
        }
    }
    let opts = SgdOptions { epochs: a.epochs, rate: a.rate, l2: a.l2, seed };
    let trained =
        train_linear_oracle(&covers, &stegos, a.threshold, &opts).map_err(|e| CliError::numeric(e.to_string()))?;
    let text = write_oracle(&trained.oracle.clone().into()).expect("linear oracles serialize");
    write_file(&a.output, text)?;
    Ok(vec![line(&[
        ("accuracy", format!("{:?}", trained.accuracy)),
        ("pairs", covers.len().to_string()),
        ("dims", feature_dim(a.threshold).to_string()),
        ("T", a.threshold.to_string()),
        ("epochs", a.epochs.to_string()),
        ("rate", format!("{:?}", a.rate)),
        ("l2", format!("{:?}", a.l2)),
        ("seed", seed.to_string()),
        ("output", a.output.display().to_string()),
    ])])
}

fn cmd_synth(a: &SynthArgs, seed: u64) -> Result<Vec<String>, CliError> {
    let kind: TextureSpec = a.texture.parse().map_err(|e| CliError::config(format!("{e}")))?;
    let img = synth_cover(kind, a.width, a.height, seed).map_err(|e| CliError::config(e.to_string()))?;
    save_pgm(&a.output, &img).map_err(|e| CliError::io(&a.output, e))?;
    Ok(vec![line(&[
        ("texture", kind.to_string()),
        ("width", a.width.to_string()),
        ("height", a.height.to_string()),
        ("seed", seed.to_string()),
        ("output", a.output.display().to_string()),
    ])])
}

fn cmd_corpus(a: &CorpusArgs, seed: u64) -> Result<Vec<String>, CliError> {
    let covers = desk_corpus(a.count, a.size, seed).map_err(|e| CliError::config(e.to_string()))?;
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    for (i, img) in covers.iter().enumerate() {
        let path = a.out_dir.join(format!("{i:05}.pgm"));
        save_pgm(&path, img).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(vec![line(&[
        ("count", a.count.to_string()),
        ("size", a.size.to_string()),
        ("seed", seed.to_string()),
        ("texture", stegcost_core::eval::DESK_TEXTURE.to_string()),
        ("out_dir", a.out_dir.display().to_string()),
    ])])
}
