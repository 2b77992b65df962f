//! Score matrices (CSV: source rows x target columns, and JSON) and the long
//! contribution-tensor dump `source,target,unit,time,value`.

use std::path::Path;

use funcausal_core::scores::{CausalScoreMatrix, ContributionTensor};
use funcausal_core::PanelSeries;
use serde::{Deserialize, Serialize};

use super::{num, write_file, write_json, Meta};
use crate::error::Result;

pub fn to_csv(m: &CausalScoreMatrix, var_names: &[String], meta: &Meta) -> String {
    let mut out = meta.csv_header();
    out.push_str("source");
    for v in var_names {
        out.push(',');
        out.push_str(v);
    }
    out.push('\n');
    for (i, src) in var_names.iter().enumerate() {
        out.push_str(src);
        for j in 0..var_names.len() {
            out.push(',');
            out.push_str(&num(m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, m: &CausalScoreMatrix, var_names: &[String], meta: &Meta) -> Result<()> {
    write_file(path, to_csv(m, var_names, meta).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresDoc {
    pub meta: Meta,
    pub metric: String,
    pub var_names: Vec<String>,
    /// `scores[source][target]`.
    pub scores: Vec<Vec<f64>>,
}

pub fn to_doc(m: &CausalScoreMatrix, var_names: &[String], meta: Meta) -> ScoresDoc {
    let n = m.n_vars;
    ScoresDoc {
        meta,
        metric: m.metric.name().into(),
        var_names: var_names.to_vec(),
        scores: (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect(),
    }
}

pub fn write_doc(path: &Path, m: &CausalScoreMatrix, var_names: &[String], meta: Meta) -> Result<()> {
    write_json(path, &to_doc(m, var_names, meta))
}

pub fn tensor_csv(t: &ContributionTensor, panel: &PanelSeries, meta: &Meta) -> String {
    let mut out = meta.csv_header();
    out.push_str("source,target,unit,time,value\n");
    let names = panel.var_names();
    for i in 0..t.n_vars() {
        for j in 0..t.n_vars() {
            for (w, o) in t.origins().iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    names[i],
                    names[j],
                    panel.unit_ids()[o.unit],
                    panel.times()[o.time],
                    num(t.get(i, j, w))
                ));
            }
        }
    }
    out
}
