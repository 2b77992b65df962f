//! Panel CSV: header `unit,time,<var...>`, one row per (unit, time), rows
//! sorted by unit then time. Lines starting with `#` are metadata.

use std::collections::HashMap;
use std::path::Path;

use funcausal_core::PanelSeries;

use super::{num, read_file, write_file, Meta};
use crate::error::{CliError, Result};

pub fn to_csv(panel: &PanelSeries, meta: &Meta) -> String {
    let mut out = meta.csv_header();
    out.push_str("unit,time");
    for v in panel.var_names() {
        out.push(',');
        out.push_str(v);
    }
    out.push('\n');
    for (u, id) in panel.unit_ids().iter().enumerate() {
        for (t, time) in panel.times().iter().enumerate() {
            out.push_str(id);
            out.push(',');
            out.push_str(&time.to_string());
            for k in 0..panel.n_vars() {
                out.push(',');
                out.push_str(&num(panel.get(u, t, k)));
            }
            out.push('\n');
        }
    }
    out
}

pub fn write(path: &Path, panel: &PanelSeries, meta: &Meta) -> Result<()> {
    write_file(path, to_csv(panel, meta).as_bytes())
}

fn data_err(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

/// Parses a balanced panel. Rejects missing columns, missing or non-numeric
/// values, duplicate rows, gaps, and units whose time span differs from the
/// first unit's.
pub fn parse(text: &str) -> Result<PanelSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| data_err(format!("panel header: {e}")))?.clone();
    for (pos, name) in ["unit", "time"].iter().enumerate() {
        if headers.get(pos) != Some(name) {
            return Err(data_err(format!("panel CSV is missing column `{name}` (expected at position {})", pos + 1)));
        }
    }
    let var_names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    if var_names.is_empty() {
        return Err(data_err("panel CSV has no variable columns"));
    }
    if let Some(k) = var_names.iter().position(|v| v.is_empty()) {
        return Err(data_err(format!("panel CSV column {} has an empty name", k + 3)));
    }

    let mut unit_ids: Vec<String> = Vec::new();
    let mut unit_pos: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<Vec<(i64, Vec<f64>)>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| data_err(format!("panel row {}: {e}", line + 1)))?;
        let unit = rec.get(0).unwrap_or("").to_string();
        let time: i64 = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| data_err(format!("unit `{unit}`: invalid time `{}`", rec.get(1).unwrap_or(""))))?;
        let mut vals = Vec::with_capacity(var_names.len());
        for (k, name) in var_names.iter().enumerate() {
            let field = rec.get(k + 2).unwrap_or("");
            let v: f64 = field.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                data_err(format!("unit `{unit}`, time {time}: missing or invalid value `{field}` for `{name}`"))
            })?;
            vals.push(v);
        }
        let u = *unit_pos.entry(unit.clone()).or_insert_with(|| {
            unit_ids.push(unit.clone());
            rows.push(Vec::new());
            unit_ids.len() - 1
        });
        rows[u].push((time, vals));
    }
    if unit_ids.is_empty() {
        return Err(data_err("panel CSV has no rows"));
    }

    let mut times: Option<Vec<i64>> = None;
    let mut values = Vec::new();
    for (u, unit_rows) in rows.iter_mut().enumerate() {
        unit_rows.sort_by_key(|r| r.0);
        let ts: Vec<i64> = unit_rows.iter().map(|r| r.0).collect();
        if let Some(w) = ts.windows(2).find(|w| w[1] != w[0] + 1) {
            return Err(data_err(format!(
                "unbalanced panel: unit `{}` has a gap or duplicate between times {} and {}",
                unit_ids[u], w[0], w[1]
            )));
        }
        match &times {
            None => times = Some(ts),
            Some(first) if *first != ts => {
                return Err(data_err(format!(
                    "unbalanced panel: unit `{}` spans {}..{} ({} rows) but unit `{}` spans {}..{} ({} rows)",
                    unit_ids[u],
                    ts[0],
                    ts[ts.len() - 1],
                    ts.len(),
                    unit_ids[0],
                    first[0],
                    first[first.len() - 1],
                    first.len()
                )))
            }
            _ => {}
        }
        for r in unit_rows.iter() {
            values.extend_from_slice(&r.1);
        }
    }
    Ok(PanelSeries::new(unit_ids, var_names, times.unwrap(), values)?)
}

pub fn read(path: &Path) -> Result<PanelSeries> {
    parse(&read_file(path)?).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Meta {
        Meta::new("test", serde_json::json!({}))
    }

    #[test]
    fn round_trip_is_exact() {
        let p = PanelSeries::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![1990, 1991, 1992],
            vec![0.1, -2.5, 1.0 / 3.0, 4.0, 5.5e-12, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, -1e300],
        )
        .unwrap();
        let back = parse(&to_csv(&p, &meta())).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn missing_column_is_named() {
        let e = parse("unit,year,x\na,1,2\n").unwrap_err();
        assert!(e.to_string().contains("`time`"), "{e}");
        let e = parse("id,time,x\na,1,2\n").unwrap_err();
        assert!(e.to_string().contains("`unit`"), "{e}");
    }

    #[test]
    fn unbalanced_unit_is_named() {
        let e = parse("unit,time,x\na,1,1\na,2,2\na,3,3\nb,1,1\nb,2,2\n").unwrap_err();
        assert!(e.to_string().contains("`b`"), "{e}");
        let e = parse("unit,time,x\na,1,1\na,3,2\n").unwrap_err();
        assert!(e.to_string().contains("`a`"), "{e}");
    }

    #[test]
    fn missing_values_are_rejected() {
        let e = parse("unit,time,x,y\na,1,1,\na,2,2,3\n").unwrap_err();
        assert!(e.to_string().contains("`y`"), "{e}");
        assert!(parse("unit,time,x\na,1,NA\n").is_err());
    }

    #[test]
    fn unsorted_rows_are_reordered() {
        let p = parse("unit,time,x\na,2,20\na,1,10\n").unwrap();
        assert_eq!(p.values(), &[10.0, 20.0]);
        assert_eq!(p.times(), &[1, 2]);
    }
}
