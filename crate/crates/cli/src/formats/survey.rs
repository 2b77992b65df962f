//! Survey table CSV and JSON.

use std::path::Path;

use funcausal_core::analysis::{FlagCounts, SurveyTable};
use serde::{Deserialize, Serialize};

use super::{num, write_file, write_json, Meta};
use crate::error::Result;

pub const HEADER: &str = "source,target,score,monotone,threshold_activation,saturating,regime_reversal,\
violation_frac,regime_ratio,tail_ratio_lo,tail_ratio_hi";

pub fn to_csv(table: &SurveyTable, var_names: &[String], meta: &Meta) -> String {
    let mut out = meta.csv_header();
    out.push_str(HEADER);
    out.push('\n');
    for r in &table.rows {
        let f = &r.flags;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            var_names[r.source],
            var_names[r.target],
            num(r.score),
            f.monotone,
            f.threshold_activation,
            f.saturating,
            f.regime_reversal,
            num(f.stats.violation_frac),
            num(f.stats.regime_ratio),
            num(f.stats.tail_ratio_lo),
            num(f.stats.tail_ratio_hi),
        ));
    }
    out
}

pub fn write_csv(path: &Path, table: &SurveyTable, var_names: &[String], meta: &Meta) -> Result<()> {
    write_file(path, to_csv(table, var_names, meta).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyDoc {
    pub meta: Meta,
    pub var_names: Vec<String>,
    pub table: SurveyTable,
    pub counts: FlagCounts,
    /// Grid sections used by the saturation criterion.
    pub saturation_split: String,
}

pub fn write_doc(path: &Path, table: &SurveyTable, var_names: &[String], meta: Meta) -> Result<()> {
    write_json(
        path,
        &SurveyDoc {
            meta,
            var_names: var_names.to_vec(),
            counts: table.counts,
            table: table.clone(),
            saturation_split: "tails = first and last quarter of grid points, middle = remaining half".into(),
        },
    )
}
