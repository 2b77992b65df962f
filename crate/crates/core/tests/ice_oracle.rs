mod support;

use funcausal_core::ice::{self, Grid, Intervention, RegimeSpec, RegimeVariable};
use funcausal_core::window::{self, WindowOrigin};
use proptest::prelude::*;
use rand::Rng;
use support::oracle::{self, rng};

const TOL: f64 = 1e-10;

fn grid(values: Vec<f64>) -> Grid {
    Grid { values, lo_pct: 0.0, hi_pct: 100.0 }
}

fn assert_close(a: &[f64], b: &[f64], what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length");
    for (g, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= TOL, "{what}: grid point {g}: {x} vs {y}");
    }
}

#[test]
fn every_variant_matches_brute_force_on_random_tiny_models() {
    let mut r = rng(7);
    for case in 0..20 {
        let n = r.gen_range(1..=4);
        let k = r.gen_range(1..=3);
        let h = r.gen_range(1..=5);
        let windows = r.gen_range(6..=100);
        let model = oracle::random_model(n, k, h, &mut r);
        let ws = oracle::random_windows(n, k, windows, &mut r);
        let edge = (r.gen_range(0..n), r.gen_range(0..n));
        let g: Vec<f64> = (0..9).map(|_| r.gen_range(-2.5..2.5)).collect();
        let gr = grid(g.clone());
        let tag = format!("case {case} (n={n}, k={k}, h={h}, w={windows}, edge={edge:?})");

        let agg = ice::ice_lag_aggregated(&model, &ws, edge, &gr).unwrap();
        assert_close(&agg.response, &oracle::ice_curve(&model, &ws, edge, &g, None), &tag);

        for lag in 1..=k {
            let c = ice::ice_lag_specific(&model, &ws, edge, lag, &gr).unwrap();
            assert_close(&c.response, &oracle::ice_curve(&model, &ws, edge, &g, Some(lag)), &tag);
        }

        let n_bins = r.gen_range(2..=3);
        let regime_var = r.gen_range(0..n);
        for (variable, var_idx) in [(RegimeVariable::TargetLag, edge.1), (RegimeVariable::VariableLag(regime_var), regime_var)] {
            for lag in [None, Some(r.gen_range(1..=k))] {
                let intervention = lag.map_or(Intervention::AllLags, Intervention::Lag);
                let spec = RegimeSpec { variable, n_bins };
                let c = ice::ice_regime_conditional(&model, &ws, edge, &gr, &spec, intervention).unwrap();
                let want = oracle::regime_curves(&model, &ws, edge, &g, lag, var_idx, n_bins);
                let bins = c.bins.as_ref().unwrap();
                for b in 0..n_bins {
                    assert_close(&bins[b], &want[b], &format!("{tag} bin {b}"));
                }
                assert_close(&c.response, &oracle::ice_curve(&model, &ws, edge, &g, lag), &tag);
            }
        }
    }
}

#[test]
fn zero_network_gives_flat_zero_curve() {
    let mut r = rng(1);
    let model = funcausal_core::AdditiveArModel::zeros(3, 2, 4);
    let ws = oracle::random_windows(3, 2, 20, &mut r);
    let c = ice::ice_lag_aggregated(&model, &ws, (0, 1), &grid(vec![-1.0, 0.0, 1.0])).unwrap();
    assert_eq!(c.response, vec![0.0; 3]);
}

#[test]
fn curve_at_observed_value_is_zero_for_that_window() {
    // a single window evaluated at its own lag value has delta exactly 0
    let mut r = rng(3);
    let model = oracle::random_model(2, 1, 3, &mut r);
    let ws = oracle::random_windows(2, 1, 1, &mut r);
    let x = ws.inputs(0)[0];
    let c = ice::ice_lag_aggregated(&model, &ws, (0, 1), &grid(vec![x])).unwrap();
    assert_eq!(c.response, vec![0.0]);
}

#[test]
fn bad_lag_and_edge_are_rejected() {
    let mut r = rng(4);
    let model = oracle::random_model(2, 2, 3, &mut r);
    let ws = oracle::random_windows(2, 2, 10, &mut r);
    let g = grid(vec![0.0, 1.0]);
    assert!(ice::ice_lag_specific(&model, &ws, (0, 1), 0, &g).is_err());
    assert!(ice::ice_lag_specific(&model, &ws, (0, 1), 3, &g).is_err());
    assert!(ice::ice_lag_aggregated(&model, &ws, (2, 0), &g).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn count_weighted_bin_average_is_the_unconditional_curve(seed in any::<u64>(), n_bins in 2usize..5) {
        let mut r = rng(seed);
        let model = oracle::random_model(3, 2, 4, &mut r);
        let ws = oracle::random_windows(3, 2, 40, &mut r);
        let g = grid(vec![-1.5, -0.3, 0.4, 2.0]);
        let spec = RegimeSpec { variable: RegimeVariable::TargetLag, n_bins };
        let c = ice::ice_regime_conditional(&model, &ws, (1, 2), &g, &spec, Intervention::AllLags).unwrap();
        let counts = c.bin_counts.as_ref().unwrap();
        let bins = c.bins.as_ref().unwrap();
        for p in 0..g.len() {
            let weighted: f64 = bins.iter().zip(counts).map(|(b, &m)| b[p] * m as f64).sum::<f64>() / ws.len() as f64;
            prop_assert!((weighted - c.response[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn curves_do_not_depend_on_window_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = oracle::random_model(2, 3, 3, &mut r);
        let ws = oracle::random_windows(2, 3, 30, &mut r);
        let mut perm: Vec<usize> = (0..ws.len()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, r.gen_range(0..=i));
        }
        let shuffled = ws.select(&perm);
        let g = grid(vec![-1.0, 0.5, 1.7]);
        let spec = RegimeSpec::default();
        let a = ice::ice_regime_conditional(&model, &ws, (0, 1), &g, &spec, Intervention::AllLags).unwrap();
        let b = ice::ice_regime_conditional(&model, &shuffled, (0, 1), &g, &spec, Intervention::AllLags).unwrap();
        for (x, y) in a.response.iter().zip(&b.response) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        for (cb, db) in a.bins.unwrap().iter().zip(b.bins.unwrap().iter()) {
            for (x, y) in cb.iter().zip(db) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_lag_model_makes_aggregated_and_lag_one_agree(seed in any::<u64>()) {
        // with K = 1 both interventions replace the same single input
        let mut r = rng(seed);
        let model = oracle::random_model(2, 1, 4, &mut r);
        let ws = oracle::random_windows(2, 1, 25, &mut r);
        let g = grid(vec![-2.0, -0.1, 0.9]);
        let a = ice::ice_lag_aggregated(&model, &ws, (1, 0), &g).unwrap();
        let b = ice::ice_lag_specific(&model, &ws, (1, 0), 1, &g).unwrap();
        prop_assert_eq!(a.response, b.response);
    }
}

#[test]
fn regime_labels_follow_target_lag_quantiles() {
    // three windows whose target lag is 3, 1, 2: bins low/mid/high by rank
    let inputs = vec![0.0, 3.0, 0.0, 1.0, 0.0, 2.0];
    let ws = window::from_parts(
        2,
        1,
        inputs,
        vec![0.0; 6],
        (0..3).map(|t| WindowOrigin { unit: 0, time: t }).collect(),
        None,
    )
    .unwrap();
    let a = RegimeSpec { variable: RegimeVariable::TargetLag, n_bins: 3 }.assign(&ws, 1).unwrap();
    assert_eq!(a.labels, vec![2, 0, 1]);
    assert_eq!(a.counts, vec![1, 1, 1]);
}
