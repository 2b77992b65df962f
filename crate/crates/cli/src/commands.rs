//! Subcommand definitions and their implementations.
//!
//! Each command resolves its configuration (defaults, then `--config`, then
//! flags), runs the pipeline stage and writes its outputs with an embedded
//! metadata block.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use funcausal_core::analysis::{self, SurveyConfig};
use funcausal_core::dgp;
use funcausal_core::ice::{self, Intervention, RegimeSpec, RegimeVariable, ResponseCurve};
use funcausal_core::mechanism::MechanismKind;
use funcausal_core::scores::{self, CausalScoreMatrix, ScoreMetric};
use funcausal_core::window::{build_windows, WindowSet};
use funcausal_core::{train, AdditiveArModel, PanelSeries};

use crate::benchmark;
use crate::config::{RunConfig, WindowScope};
use crate::error::{CliError, Result};
use crate::formats::{self, curve::CurveDoc, model::SavedModel, Meta};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "funcausal", version, about = "Function-valued causal influence from additive autoregressive models")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "FUNCAUSAL_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic three-variable system as a panel CSV.
    Synth(SynthArgs),
    /// Train an additive autoregressive model on a panel CSV.
    Train(TrainArgs),
    /// Scalar causal scores of a trained model.
    Scores(ScoresArgs),
    /// Response curve for one edge.
    Ice(IceArgs),
    /// Synthetic benchmark over all mechanisms.
    Benchmark(BenchmarkArgs),
    /// Functional-form survey of every edge above a score threshold.
    Survey(SurveyArgs),
    /// Print the resolved configuration as TOML.
    Config(ConfigArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Aggregated,
    Lag,
    Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mechanism {
    Linear,
    Threshold,
    Saturating,
    SignChanging,
}

impl From<Mechanism> for MechanismKind {
    fn from(m: Mechanism) -> Self {
        match m {
            Mechanism::Linear => MechanismKind::Linear,
            Mechanism::Threshold => MechanismKind::Threshold,
            Mechanism::Saturating => MechanismKind::Saturating,
            Mechanism::SignChanging => MechanismKind::SignChanging,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelOverrides {
    #[arg(long)]
    pub lag: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Training seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ModelOverrides {
    fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.model;
        set(&mut m.max_lag, self.lag);
        set(&mut m.hidden_units, self.hidden);
        set(&mut m.epochs, self.epochs);
        set(&mut m.batch_size, self.batch_size);
        set(&mut m.learning_rate, self.learning_rate);
        set(&mut m.sparsity_l1, self.l1);
        set(&mut m.weight_decay, self.weight_decay);
        set(&mut m.dropout, self.dropout);
        set(&mut m.seed, self.seed);
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct DgpOverrides {
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub jump_prob: Option<f64>,
    #[arg(long)]
    pub jump_magnitude: Option<f64>,
}

impl DgpOverrides {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.dgp.length, self.length);
        set(&mut cfg.dgp.noise_sigma, self.sigma);
        set(&mut cfg.dgp.jump_prob, self.jump_prob);
        set(&mut cfg.dgp.jump_magnitude, self.jump_magnitude);
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum)]
    pub mechanism: Option<Mechanism>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub dgp: DgpOverrides,
    /// Output panel CSV.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Input panel CSV.
    #[arg(long, short)]
    pub panel: PathBuf,
    #[command(flatten)]
    pub model: ModelOverrides,
    /// Output model JSON.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ModelInput {
    /// Trained model JSON.
    #[arg(long, short)]
    pub model: PathBuf,
    /// Panel CSV; standardized with the statistics stored in the model.
    #[arg(long, short)]
    pub panel: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ScoresArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub input: ModelInput,
    /// sd, var, mean_abs or max_abs.
    #[arg(long)]
    pub metric: Option<String>,
    /// Score on all windows or only the training windows.
    #[arg(long, value_enum)]
    pub windows: Option<Windows>,
    /// Score matrix CSV.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Score matrix JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Per-window contribution CSV.
    #[arg(long)]
    pub contributions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Windows {
    All,
    Train,
}

#[derive(Debug, Clone, Args)]
pub struct IceArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub input: ModelInput,
    /// Source variable (name or index).
    #[arg(long)]
    pub source: String,
    /// Target variable (name or index).
    #[arg(long)]
    pub target: String,
    #[arg(long, value_enum, default_value = "aggregated")]
    pub variant: Variant,
    /// Lag set to the grid value for `lag`, or for `regime` when only one lag
    /// is intervened on.
    #[arg(long)]
    pub lag: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Variable whose most recent lag defines the regimes (default: target).
    #[arg(long)]
    pub regime_var: Option<String>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Add bootstrap bands (aggregated and regime variants).
    #[arg(long)]
    pub bootstrap: bool,
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub bootstrap_seed: Option<u64>,
    /// Curve CSV.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Curve JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Static SVG plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    #[command(flatten)]
    pub dgp: DgpOverrides,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Directory for report.json, scores.csv, recovery.csv and runs.csv.
    #[arg(long, short)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SurveyArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub input: ModelInput,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub include_self: bool,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Survey CSV.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Survey JSON with flag counts.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn load(args: &ConfigArgs) -> Result<RunConfig> {
    RunConfig::load_or_default(args.config.as_deref())
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Scores(a) => scores_cmd(&a),
        Command::Ice(a) => ice_cmd(&a),
        Command::Benchmark(a) => benchmark_cmd(&a),
        Command::Survey(a) => survey_cmd(&a),
        Command::Config(a) => {
            print!("{}", load(&a)?.to_toml());
            Ok(())
        }
    }
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let mut cfg = load(&a.config)?;
    if let Some(m) = a.mechanism {
        cfg.mechanism.kind = m.into();
    }
    set(&mut cfg.dgp.seed, a.seed);
    a.dgp.apply(&mut cfg);
    let panel = dgp::generate_system(&cfg.mechanism.spec(), &cfg.dgp)?;
    formats::panel::write(&a.out, &panel, &Meta::new("synth", cfg.to_json_value()))
}

/// Reads a panel and standardizes it.
pub fn load_training_panel(path: &Path) -> Result<PanelSeries> {
    Ok(formats::panel::read(path)?.standardize()?)
}

pub fn train_cmd(a: &TrainArgs) -> Result<()> {
    let mut cfg = load(&a.config)?;
    a.model.apply(&mut cfg);
    let panel = load_training_panel(&a.panel)?;
    let model = train::train(&panel, &cfg.model)?;
    formats::model::write(&a.out, &model, panel.var_names(), Meta::new("train", cfg.to_json_value()))
}

/// Loads a model and the panel to analyse, standardized with the model's
/// statistics and checked for matching variables.
pub fn load_model_and_panel(input: &ModelInput) -> Result<(SavedModel, PanelSeries, WindowSet)> {
    let saved = formats::model::read(&input.model)?;
    let raw = formats::panel::read(&input.panel)?;
    if raw.var_names() != saved.var_names.as_slice() {
        return Err(CliError::Data(format!(
            "panel variables {:?} differ from the model's {:?}",
            raw.var_names(),
            saved.var_names
        )));
    }
    let stats = saved
        .model
        .stats()
        .ok_or_else(|| CliError::Data("model carries no standardization statistics".into()))?;
    let panel = raw.standardize_with(stats)?;
    let ws = build_windows(&panel, saved.model.lag())?;
    Ok((saved, panel, ws))
}

pub fn score_matrix(model: &AdditiveArModel, ws: &WindowSet, metric: ScoreMetric, scope: WindowScope) -> Result<CausalScoreMatrix> {
    let ws = match scope {
        WindowScope::All => ws.clone(),
        WindowScope::Train => {
            let frac = model.hyperparams().map_or(0.0, |h| h.val_split);
            ws.select(&ws.chronological_split(frac).0)
        }
    };
    let tensor = scores::contribution_tensor(model, &ws)?;
    Ok(scores::scalar_scores(&tensor, metric)?)
}

pub fn scores_cmd(a: &ScoresArgs) -> Result<()> {
    let mut cfg = load(&a.config)?;
    set(&mut cfg.scores.metric, a.metric.clone());
    if let Some(w) = a.windows {
        cfg.scores.windows = match w {
            Windows::All => WindowScope::All,
            Windows::Train => WindowScope::Train,
        };
    }
    let metric = ScoreMetric::parse(&cfg.scores.metric)
        .ok_or_else(|| CliError::Config(format!("unknown score metric `{}`", cfg.scores.metric)))?;
    let (saved, panel, ws) = load_model_and_panel(&a.input)?;
    let matrix = score_matrix(&saved.model, &ws, metric, cfg.scores.windows)?;
    let meta = Meta::new("scores", cfg.to_json_value());
    formats::scores::write_csv(&a.out, &matrix, &saved.var_names, &meta)?;
    if let Some(p) = &a.json {
        formats::scores::write_doc(p, &matrix, &saved.var_names, meta.clone())?;
    }
    if let Some(p) = &a.contributions {
        let tensor = scores::contribution_tensor(&saved.model, &ws)?;
        formats::write_file(p, formats::scores::tensor_csv(&tensor, &panel, &meta).as_bytes())?;
    }
    Ok(())
}

fn var(saved: &SavedModel, name: &str) -> Result<usize> {
    saved.var_index(name).ok_or_else(|| CliError::Config(format!("unknown variable `{name}`")))
}

pub fn ice_cmd(a: &IceArgs) -> Result<()> {
    let mut cfg = load(&a.config)?;
    set(&mut cfg.regimes.n_bins, a.bins);
    set(&mut cfg.regimes.variable, a.regime_var.clone());
    set(&mut cfg.grid.points, a.grid_points);
    set(&mut cfg.bootstrap.resamples, a.resamples);
    set(&mut cfg.bootstrap.seed, a.bootstrap_seed);
    let (saved, panel, ws) = load_model_and_panel(&a.input)?;
    let edge = (var(&saved, &a.source)?, var(&saved, &a.target)?);
    let grid = ice::make_grid(&panel, edge.0, cfg.grid.points, cfg.grid.lo_pct, cfg.grid.hi_pct)?;
    let regimes = RegimeSpec {
        variable: if cfg.regimes.variable.is_empty() {
            RegimeVariable::TargetLag
        } else {
            RegimeVariable::VariableLag(var(&saved, &cfg.regimes.variable)?)
        },
        n_bins: cfg.regimes.n_bins,
    };
    let mut curve = match a.variant {
        Variant::Aggregated => ice::ice_lag_aggregated(&saved.model, &ws, edge, &grid)?,
        Variant::Lag => {
            let lag = a.lag.ok_or_else(|| CliError::Config("--variant lag needs --lag".into()))?;
            ice::ice_lag_specific(&saved.model, &ws, edge, lag, &grid)?
        }
        Variant::Regime => {
            let intervention = a.lag.map_or(Intervention::AllLags, Intervention::Lag);
            ice::ice_regime_conditional(&saved.model, &ws, edge, &grid, &regimes, intervention)?
        }
    };
    let mut regime_bounds = None;
    if a.variant == Variant::Regime {
        regime_bounds = Some(regimes.assign(&ws, edge.1)?.bounds);
    }
    curve.provenance.source_name = Some(saved.var_names[edge.0].clone());
    curve.provenance.target_name = Some(saved.var_names[edge.1].clone());

    let mut bootstrap = None;
    if a.bootstrap {
        if a.variant == Variant::Lag {
            return Err(CliError::Config("bootstrap bands are available for the aggregated and regime variants".into()));
        }
        if a.variant == Variant::Regime && a.lag.is_some() {
            return Err(CliError::Config("bootstrap bands use the all-lags intervention; drop --lag".into()));
        }
        let b = analysis::bootstrap_ci(&saved.model, &ws, edge, &grid, &regimes, &cfg.bootstrap)?;
        attach_bands(&mut curve, &b, a.variant == Variant::Regime);
        bootstrap = Some(b);
    }

    let meta = Meta::new("ice", cfg.to_json_value());
    formats::curve::write_csv(&a.out, &curve, &meta)?;
    if let Some(p) = &a.json {
        let doc = CurveDoc {
            meta: meta.clone(),
            source: saved.var_names[edge.0].clone(),
            target: saved.var_names[edge.1].clone(),
            bin_columns: curve.bins.as_ref().map(|b| formats::curve::bin_column_names(b.len())),
            curve: curve.clone(),
            regime_bounds,
            bootstrap,
        };
        formats::curve::write_doc(p, &doc)?;
    }
    if let Some(p) = &a.svg {
        let title = format!("{} -> {} ({})", saved.var_names[edge.0], saved.var_names[edge.1], curve.provenance.variant.name());
        formats::write_file(p, svg::render(&curve, &title).as_bytes())?;
    }
    Ok(())
}

/// Copies bootstrap bands onto a curve for CSV/SVG output.
pub fn attach_bands(curve: &mut ResponseCurve, b: &analysis::BootstrapResult, with_bins: bool) {
    curve.band = Some(ice::Band { lower: b.aggregate.lower.clone(), upper: b.aggregate.upper.clone() });
    if with_bins {
        curve.bin_bands = Some(b.bins.iter().map(|c| ice::Band { lower: c.lower.clone(), upper: c.upper.clone() }).collect());
    }
}

pub fn benchmark_cmd(a: &BenchmarkArgs) -> Result<()> {
    let mut cfg = load(&a.config)?;
    set(&mut cfg.benchmark.runs, a.runs);
    set(&mut cfg.benchmark.base_seed, a.base_seed);
    set(&mut cfg.model.epochs, a.epochs);
    a.dgp.apply(&mut cfg);
    let report = benchmark::run_benchmark(&cfg)?;
    let dir = &a.out_dir;
    formats::write_json(&dir.join("report.json"), &report)?;
    formats::write_file(&dir.join("scores.csv"), benchmark::score_table_csv(&report).as_bytes())?;
    formats::write_file(&dir.join("recovery.csv"), benchmark::recovery_table_csv(&report).as_bytes())?;
    formats::write_file(&dir.join("runs.csv"), benchmark::records_csv(&report).as_bytes())?;
    for s in &report.summary {
        eprintln!(
            "{:<14} score {:.4} +- {:.4}   recovery r {:.4} +- {:.4}",
            s.mechanism.name(),
            s.score.mean,
            s.score.std,
            s.recovery.mean,
            s.recovery.std
        );
    }
    Ok(())
}

pub fn survey_cmd(a: &SurveyArgs) -> Result<()> {
    let mut cfg = load(&a.config)?;
    set(&mut cfg.survey.score_threshold, a.threshold);
    if a.include_self {
        cfg.survey.include_self = true;
    }
    set(&mut cfg.regimes.n_bins, a.bins);
    let (saved, panel, _) = load_model_and_panel(&a.input)?;
    let scfg = SurveyConfig {
        score_threshold: cfg.survey.score_threshold,
        grid_points: cfg.grid.points,
        lo_pct: cfg.grid.lo_pct,
        hi_pct: cfg.grid.hi_pct,
        n_bins: cfg.regimes.n_bins,
        include_self: cfg.survey.include_self,
    };
    let table = analysis::heterogeneity_survey(&saved.model, &panel, &scfg)?;
    let meta = Meta::new("survey", cfg.to_json_value());
    formats::survey::write_csv(&a.out, &table, &saved.var_names, &meta)?;
    if let Some(p) = &a.json {
        formats::survey::write_doc(p, &table, &saved.var_names, meta)?;
    }
    Ok(())
}
