//! Versioned JSON model document.

use std::path::Path;

use funcausal_core::model::{Layout, TrainHistory};
use funcausal_core::{AdditiveArModel, ColumnStats, Hyperparams};
use serde::{Deserialize, Serialize};

use super::{read_file, write_file, Meta};
use crate::error::{CliError, Result};

pub const FORMAT: &str = "funcausal-additive-ar-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub source: usize,
    pub target: usize,
    /// Hidden x lag, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub format: String,
    pub format_version: u32,
    pub meta: Meta,
    pub n_vars: usize,
    pub max_lag: usize,
    pub hidden_units: usize,
    pub var_names: Vec<String>,
    pub stats: Option<Vec<ColumnStats>>,
    pub hyperparams: Option<Hyperparams>,
    pub biases: Vec<f64>,
    pub networks: Vec<NetworkDoc>,
    pub history: Option<TrainHistory>,
}

/// A model plus the variable names of the panel it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: AdditiveArModel,
    pub var_names: Vec<String>,
}

impl SavedModel {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name).or_else(|| name.parse().ok().filter(|&i| i < self.var_names.len()))
    }
}

pub fn to_doc(model: &AdditiveArModel, var_names: &[String], meta: Meta) -> ModelDoc {
    let l = model.layout();
    let n = l.n_vars;
    let networks = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let net = model.net(i, j);
            NetworkDoc { source: i, target: j, w1: net.w1.to_vec(), b1: net.b1.to_vec(), w2: net.w2.to_vec(), b2: net.b2 }
        })
        .collect();
    ModelDoc {
        format: FORMAT.into(),
        format_version: FORMAT_VERSION,
        meta,
        n_vars: n,
        max_lag: l.lag,
        hidden_units: l.hidden,
        var_names: var_names.to_vec(),
        stats: model.stats().map(|s| s.to_vec()),
        hyperparams: model.hyperparams().copied(),
        biases: (0..n).map(|j| model.bias(j)).collect(),
        networks,
        history: model.history().cloned(),
    }
}

pub fn from_doc(doc: ModelDoc) -> Result<SavedModel> {
    if doc.format != FORMAT {
        return Err(CliError::Data(format!("not a model file (format `{}`)", doc.format)));
    }
    if doc.format_version != FORMAT_VERSION {
        return Err(CliError::Data(format!("unsupported model format version {}", doc.format_version)));
    }
    let layout = Layout { n_vars: doc.n_vars, lag: doc.max_lag, hidden: doc.hidden_units };
    let (n, k, h) = (layout.n_vars, layout.lag, layout.hidden);
    if doc.var_names.len() != n || doc.biases.len() != n || doc.networks.len() != n * n {
        return Err(CliError::Data("model document dimensions are inconsistent".into()));
    }
    let mut params = vec![0.0; layout.n_params()];
    for net in &doc.networks {
        if net.source >= n || net.target >= n || net.w1.len() != h * k || net.b1.len() != h || net.w2.len() != h {
            return Err(CliError::Data(format!("network {} -> {} has the wrong shape", net.source, net.target)));
        }
        let o = layout.net_offset(net.source, net.target);
        let p = &mut params[o..o + layout.net_size()];
        p[..h * k].copy_from_slice(&net.w1);
        p[h * k..h * k + h].copy_from_slice(&net.b1);
        p[h * k + h..h * k + 2 * h].copy_from_slice(&net.w2);
        p[h * k + 2 * h] = net.b2;
    }
    params[layout.bias_offset()..].copy_from_slice(&doc.biases);
    let model = AdditiveArModel::from_parts(layout, params, doc.stats, doc.hyperparams, doc.history)?;
    Ok(SavedModel { model, var_names: doc.var_names })
}

pub fn write(path: &Path, model: &AdditiveArModel, var_names: &[String], meta: Meta) -> Result<()> {
    let mut s = serde_json::to_string_pretty(&to_doc(model, var_names, meta)).expect("json");
    s.push('\n');
    write_file(path, s.as_bytes())
}

pub fn parse(text: &str) -> Result<SavedModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| CliError::Data(format!("model JSON: {e}")))?;
    from_doc(doc)
}

pub fn read(path: &Path) -> Result<SavedModel> {
    parse(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_round_trip_bit_exactly() {
        let mut m = AdditiveArModel::init_random(3, 2, 5, 11);
        for j in 0..3 {
            m.set_bias(j, 0.1 * j as f64 + 1e-17);
        }
        m.params_mut()[0] = 1.0 / 3.0;
        m.params_mut()[1] = -7.123456789012345e-300;
        m.set_stats(Some(vec![ColumnStats { mean: 0.1, std: 2.0 / 3.0 }; 3]));
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let doc = to_doc(&m, &names, Meta::new("t", serde_json::json!({})));
        let text = serde_json::to_string(&doc).unwrap();
        let back = parse(&text).unwrap();
        assert_eq!(back.var_names, names);
        let bits = |m: &AdditiveArModel| m.params().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.model), bits(&m));
        assert_eq!(back.model, m);
    }

    #[test]
    fn wrong_format_rejected() {
        let m = AdditiveArModel::zeros(1, 1, 1);
        let mut doc = to_doc(&m, &["x".into()], Meta::new("t", serde_json::json!({})));
        doc.format_version = 99;
        assert!(from_doc(doc).is_err());
    }
}
