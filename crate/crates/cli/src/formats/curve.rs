//! Curve CSV `x,response[,bin_low,bin_mid,bin_high][,ci_lo,ci_hi]` and the
//! matching JSON document.

use std::path::Path;

use funcausal_core::analysis::BootstrapResult;
use funcausal_core::ice::ResponseCurve;
use serde::{Deserialize, Serialize};

use super::{num, write_file, write_json, Meta};
use crate::error::Result;

pub fn bin_column_names(n_bins: usize) -> Vec<String> {
    match n_bins {
        2 => vec!["bin_low".into(), "bin_high".into()],
        3 => vec!["bin_low".into(), "bin_mid".into(), "bin_high".into()],
        n => (1..=n).map(|b| format!("bin_{b}")).collect(),
    }
}

pub fn to_csv(curve: &ResponseCurve, meta: &Meta) -> String {
    let mut out = meta.csv_header();
    let mut header = vec!["x".to_string(), "response".to_string()];
    if let Some(bins) = &curve.bins {
        header.extend(bin_column_names(bins.len()));
    }
    if curve.band.is_some() {
        header.push("ci_lo".into());
        header.push("ci_hi".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (k, &x) in curve.grid.iter().enumerate() {
        let mut row = vec![num(x), num(curve.response[k])];
        if let Some(bins) = &curve.bins {
            row.extend(bins.iter().map(|b| num(b[k])));
        }
        if let Some(band) = &curve.band {
            row.push(num(band.lower[k]));
            row.push(num(band.upper[k]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, curve: &ResponseCurve, meta: &Meta) -> Result<()> {
    write_file(path, to_csv(curve, meta).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDoc {
    pub meta: Meta,
    pub source: String,
    pub target: String,
    pub curve: ResponseCurve,
    pub bin_columns: Option<Vec<String>>,
    pub regime_bounds: Option<Vec<(f64, f64)>>,
    pub bootstrap: Option<BootstrapResult>,
}

pub fn write_doc(path: &Path, doc: &CurveDoc) -> Result<()> {
    write_json(path, doc)
}
