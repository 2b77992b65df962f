//! Small descriptive-statistics helpers. Variances use the population
//! convention (divide by the number of observations) throughout the crate.

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (two-pass).
pub fn pop_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

pub fn pop_std(xs: &[f64]) -> f64 {
    libm::sqrt(pop_variance(xs))
}

pub fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

pub fn range(xs: &[f64]) -> f64 {
    let (lo, hi) = min_max(xs);
    hi - lo
}

pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// Percentile of already sorted data with linear interpolation between
/// closest ranks (rank = p/100 * (n - 1)).
pub fn percentile_sorted(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    let rank = (pct / 100.0).clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = libm::floor(rank) as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn percentile(xs: &[f64], pct: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    percentile_sorted(&v, pct)
}

/// Pearson correlation. Errors instead of returning NaN when either side has
/// zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(alloc::format!("pearson: {} vs {} values", a.len(), b.len())));
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if !(saa > 0.0) {
        return Err(Error::ZeroVariance("first series"));
    }
    if !(sbb > 0.0) {
        return Err(Error::ZeroVariance("second series"));
    }
    Ok((sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

/// Assigns each value to one of `n_bins` equal-count bins.
///
/// Values are ranked by a stable sort on `(value, position)`; the k-th bin
/// receives ranks `[k*n/n_bins, (k+1)*n/n_bins)`. Ties can straddle a bin
/// boundary but never leave a bin empty as long as `n >= n_bins`.
pub fn equal_count_bins(values: &[f64], n_bins: usize) -> Result<Vec<usize>> {
    let n = values.len();
    if n_bins == 0 {
        return Err(crate::error::invalid("n_bins", "must be positive"));
    }
    if n < n_bins {
        return Err(Error::EmptyBin { bin: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut labels = alloc::vec![0usize; n];
    for (rank, &idx) in order.iter().enumerate() {
        labels[idx] = rank * n_bins / n;
    }
    Ok(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let (min, max) = min_max(xs);
        Summary { mean: mean(xs), std: pop_std(xs), min, max }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_matches_linear_rule() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile_sorted(&v, 0.0), 1.0);
        assert_eq!(percentile_sorted(&v, 100.0), 5.0);
        assert_eq!(percentile_sorted(&v, 50.0), 3.0);
        assert!((percentile_sorted(&v, 10.0) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn pearson_sign_and_errors() {
        let a = [1.0, 2.0, 3.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[-1.0, -2.0, -3.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&a, &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn equal_count_bins_with_ties() {
        let v = [0.0; 7];
        let l = equal_count_bins(&v, 3).unwrap();
        for b in 0..3 {
            assert!(l.iter().any(|&x| x == b));
        }
        assert!(equal_count_bins(&[1.0], 2).is_err());
    }
}
