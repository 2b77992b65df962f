//! Synthetic benchmark: for each mechanism, seeded replicates of
//! generate -> train -> score -> lag-aggregated ICE -> recovery correlation.

use funcausal_core::analysis;
use funcausal_core::dgp::{self, DgpConfig};
use funcausal_core::ice::{self, ResponseCurve};
use funcausal_core::mechanism::MechanismKind;
use funcausal_core::scores::{self, ScoreMetric};
use funcausal_core::stats::Summary;
use funcausal_core::window::{build_windows, WindowSet};
use funcausal_core::{train, AdditiveArModel, Hyperparams, PanelSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::formats::{num, Meta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub mechanism: MechanismKind,
    pub run: usize,
    pub seed: u64,
    /// sd score of the X -> Y edge.
    pub score: f64,
    /// Pearson r between the lag-aggregated curve and the true mechanism.
    pub recovery: f64,
    pub train_mse_first_epoch: f64,
    pub train_mse_last_epoch: f64,
}

/// Everything one replicate produced, for callers that want to inspect the
/// trained model.
pub struct ReplicateOutcome {
    pub record: ReplicateRecord,
    pub model: AdditiveArModel,
    pub panel: PanelSeries,
    pub windows: WindowSet,
    pub curve: ResponseCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSummary {
    pub mechanism: MechanismKind,
    pub runs: usize,
    pub score: Summary,
    pub recovery: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub meta: Meta,
    pub records: Vec<ReplicateRecord>,
    pub summary: Vec<MechanismSummary>,
}

pub fn replicate_seed(cfg: &RunConfig, run: usize) -> u64 {
    cfg.benchmark.base_seed + run as u64
}

pub fn replicate_dgp(cfg: &RunConfig, run: usize) -> DgpConfig {
    DgpConfig { seed: replicate_seed(cfg, run), ..cfg.dgp }
}

pub fn replicate_hyperparams(cfg: &RunConfig, run: usize) -> Hyperparams {
    Hyperparams { max_lag: cfg.benchmark.max_lag, seed: replicate_seed(cfg, run), ..cfg.model }
}

pub fn run_replicate(cfg: &RunConfig, kind: MechanismKind, run: usize) -> Result<ReplicateOutcome> {
    let spec = cfg.mechanism.spec_for(kind);
    let dgp_cfg = replicate_dgp(cfg, run);
    let hp = replicate_hyperparams(cfg, run);
    let panel = dgp::generate_system(&spec, &dgp_cfg)?;
    let windows = build_windows(&panel, hp.max_lag)?;
    let model = train::train_windows(&windows, &hp)?;
    let tensor = scores::contribution_tensor(&model, &windows)?;
    let matrix = scores::scalar_scores(&tensor, ScoreMetric::Sd)?;
    let grid = ice::make_grid(&panel, 0, cfg.grid.points, cfg.grid.lo_pct, cfg.grid.hi_pct)?;
    let curve = ice::ice_lag_aggregated(&model, &windows, (0, 1), &grid)?;
    let source_stats = panel.stats().map(|s| s[0]);
    let stats_for_truth = if cfg.benchmark.recovery_on_raw_scale { source_stats.as_ref() } else { None };
    let recovery = analysis::recovery_correlation_on(&curve, &spec, stats_for_truth)?;
    let hist = model.history().expect("trained model has history");
    let record = ReplicateRecord {
        mechanism: kind,
        run,
        seed: dgp_cfg.seed,
        score: matrix.get(0, 1),
        recovery,
        train_mse_first_epoch: hist.train_mse[0],
        train_mse_last_epoch: *hist.train_mse.last().unwrap(),
    };
    Ok(ReplicateOutcome { record, model, panel, windows, curve })
}

pub fn summarize(records: &[ReplicateRecord], mechanisms: &[MechanismKind]) -> Vec<MechanismSummary> {
    mechanisms
        .iter()
        .map(|&m| {
            let rs: Vec<&ReplicateRecord> = records.iter().filter(|r| r.mechanism == m).collect();
            let scores: Vec<f64> = rs.iter().map(|r| r.score).collect();
            let rec: Vec<f64> = rs.iter().map(|r| r.recovery).collect();
            MechanismSummary { mechanism: m, runs: rs.len(), score: Summary::of(&scores), recovery: Summary::of(&rec) }
        })
        .collect()
}

/// Runs every (mechanism, replicate) job, in parallel when a thread pool is
/// available. Records come back in (mechanism, run) order regardless of
/// scheduling.
pub fn run_outcomes(cfg: &RunConfig) -> Result<Vec<ReplicateOutcome>> {
    if cfg.benchmark.runs == 0 {
        return Err(CliError::Config("benchmark.runs must be positive".into()));
    }
    let jobs: Vec<(MechanismKind, usize)> = cfg
        .benchmark
        .mechanisms
        .iter()
        .flat_map(|&m| (0..cfg.benchmark.runs).map(move |r| (m, r)))
        .collect();
    jobs.par_iter()
        .map(|&(m, r)| {
            run_replicate(cfg, m, r).map_err(|e| CliError::Replicate {
                id: format!("{}/{r} (seed {})", m.name(), replicate_seed(cfg, r)),
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn run_benchmark(cfg: &RunConfig) -> Result<BenchmarkReport> {
    let outcomes = run_outcomes(cfg)?;
    Ok(report_from(cfg, outcomes.into_iter().map(|o| o.record).collect()))
}

pub fn report_from(cfg: &RunConfig, records: Vec<ReplicateRecord>) -> BenchmarkReport {
    BenchmarkReport {
        meta: Meta::new("benchmark", cfg.to_json_value()),
        summary: summarize(&records, &cfg.benchmark.mechanisms),
        records,
    }
}

fn table(report: &BenchmarkReport, pick: impl Fn(&MechanismSummary) -> Summary) -> String {
    let mut out = report.meta.csv_header();
    out.push_str("mechanism,runs,mean,std,min,max\n");
    for s in &report.summary {
        let v = pick(s);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.mechanism.name(),
            s.runs,
            num(v.mean),
            num(v.std),
            num(v.min),
            num(v.max)
        ));
    }
    out
}

/// Score table (X -> Y sd score per mechanism).
pub fn score_table_csv(report: &BenchmarkReport) -> String {
    table(report, |s| s.score)
}

/// Recovery table (Pearson r per mechanism).
pub fn recovery_table_csv(report: &BenchmarkReport) -> String {
    table(report, |s| s.recovery)
}

pub fn records_csv(report: &BenchmarkReport) -> String {
    let mut out = report.meta.csv_header();
    out.push_str("mechanism,run,seed,score,recovery,train_mse_first_epoch,train_mse_last_epoch\n");
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.mechanism.name(),
            r.run,
            r.seed,
            num(r.score),
            num(r.recovery),
            num(r.train_mse_first_epoch),
            num(r.train_mse_last_epoch)
        ));
    }
    out
}
