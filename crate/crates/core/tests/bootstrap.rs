mod support;

use funcausal_core::analysis::{self, BootstrapConfig};
use funcausal_core::ice::{self, Grid, Intervention, RegimeSpec};
use support::oracle::{self, rng};

fn grid() -> Grid {
    Grid { values: vec![-1.5, -0.5, 0.0, 0.5, 1.5], lo_pct: 0.0, hi_pct: 100.0 }
}

#[test]
fn identical_resamples_give_zero_width_bands_at_the_estimate() {
    let mut r = rng(5);
    let model = oracle::random_model(3, 2, 4, &mut r);
    let ws = oracle::random_windows(3, 2, 60, &mut r);
    let d = ice::deltas(&model, &ws, (0, 1), &grid().values, Intervention::AllLags).unwrap();
    let a = RegimeSpec::default().assign(&ws, 1).unwrap();
    let all: Vec<usize> = (0..ws.len()).collect();
    let res = analysis::bootstrap_from_resamples(&d, &a, &vec![all; 20], 0.95).unwrap();
    assert_eq!(res.aggregate.lower, res.aggregate.estimate);
    assert_eq!(res.aggregate.upper, res.aggregate.estimate);
    for b in &res.bins {
        for p in 0..b.estimate.len() {
            assert!((b.lower[p] - b.estimate[p]).abs() < 1e-12);
            assert!((b.upper[p] - b.estimate[p]).abs() < 1e-12);
        }
    }
}

#[test]
fn bands_are_ordered_deterministic_and_seed_dependent() {
    let mut r = rng(6);
    let model = oracle::random_model(2, 2, 4, &mut r);
    let ws = oracle::random_windows(2, 2, 80, &mut r);
    let cfg = BootstrapConfig { resamples: 50, ..BootstrapConfig::default() };
    let run = |c: &BootstrapConfig| analysis::bootstrap_ci(&model, &ws, (1, 0), &grid(), &RegimeSpec::default(), c).unwrap();
    let a = run(&cfg);
    let b = run(&cfg);
    assert_eq!(a, b);
    let c = run(&BootstrapConfig { seed: cfg.seed + 1, ..cfg });
    assert_ne!(a.aggregate.lower, c.aggregate.lower);
    for band in std::iter::once(&a.aggregate).chain(&a.bins) {
        for p in 0..band.estimate.len() {
            assert!(band.lower[p] <= band.upper[p]);
        }
    }
    assert_eq!(a.bins.len(), 3);
    assert_eq!(a.resamples, 50);
}

#[test]
fn sparse_bins_trigger_redraws_and_keep_every_bin_populated() {
    // 4 windows in 3 bins: plain resampling often misses a bin
    let mut r = rng(8);
    let model = oracle::random_model(2, 1, 3, &mut r);
    let ws = oracle::random_windows(2, 1, 4, &mut r);
    let cfg = BootstrapConfig { resamples: 100, ..BootstrapConfig::default() };
    let a = RegimeSpec::default().assign(&ws, 1).unwrap();
    let (resamples, redraws) = analysis::draw_resamples(ws.len(), &a, &cfg).unwrap();
    assert!(redraws > 0);
    for idx in &resamples {
        for b in 0..3 {
            assert!(idx.iter().any(|&w| a.labels[w] == b));
        }
    }
    let res = analysis::bootstrap_ci(&model, &ws, (0, 1), &grid(), &RegimeSpec::default(), &cfg).unwrap();
    assert_eq!(res.redraws, redraws);
}

#[test]
fn invalid_configurations_are_rejected() {
    let mut r = rng(9);
    let model = oracle::random_model(2, 1, 3, &mut r);
    let ws = oracle::random_windows(2, 1, 10, &mut r);
    for cfg in [
        BootstrapConfig { resamples: 1, ..BootstrapConfig::default() },
        BootstrapConfig { confidence: 1.0, ..BootstrapConfig::default() },
        BootstrapConfig { resample_size: Some(0), ..BootstrapConfig::default() },
    ] {
        assert!(analysis::bootstrap_ci(&model, &ws, (0, 1), &grid(), &RegimeSpec::default(), &cfg).is_err());
    }
}
