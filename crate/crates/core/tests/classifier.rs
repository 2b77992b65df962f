//! Functional-form flags on analytic curves. Each expected value below is
//! worked out by hand from the thresholds (violations < 10%, low/high
//! magnitude ratio < 0.40, tail/middle range ratio < 0.15, zero crossing) on
//! an 81-point grid over [-3, 3] (step 0.075; tails are points 0..20 and
//! 61..81, the middle points 20..61).

use funcausal_core::analysis::{self, FunctionalFormFlags};
use proptest::prelude::*;

fn grid() -> Vec<f64> {
    (0..81).map(|i| -3.0 + 0.075 * i as f64).collect()
}

fn curve(f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid().into_iter().map(f).collect()
}

fn flags(agg: &[f64], low: &[f64], high: &[f64]) -> FunctionalFormFlags {
    analysis::classify(agg, low, high).unwrap()
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

#[test]
fn line() {
    // no violations; tail range 19*0.075 = 1.425 over middle 40*0.075 = 3.0
    // (0.475); crosses zero; identical bins give ratio 1.
    let c = curve(|x| x);
    let f = flags(&c, &c, &c);
    assert!(f.monotone);
    assert!(!f.saturating);
    assert!(f.regime_reversal);
    assert!(!f.threshold_activation);
    assert_eq!(f.stats.violation_frac, 0.0);
    assert!((f.stats.tail_ratio_lo - 0.475).abs() < 1e-12);
    assert_eq!(f.stats.regime_ratio, 1.0);
}

#[test]
fn clipped_line() {
    // clip(x, -1, 1): both tails are flat at -1 / +1 (ratio 0); diffs are
    // zero in the tails and positive in between (no violations); crosses
    // zero. Low bin at 0.2x the high bin: ratio 0.2.
    let c = curve(|x| x.clamp(-1.0, 1.0));
    let f = flags(&c, &scaled(&c, 0.2), &c);
    assert!(f.monotone);
    assert!(f.saturating);
    assert!(f.regime_reversal);
    assert!(f.threshold_activation);
    assert_eq!(f.stats.tail_ratio_lo, 0.0);
    assert_eq!(f.stats.tail_ratio_hi, 0.0);
    assert!((f.stats.regime_ratio - 0.2).abs() < 1e-15);
}

#[test]
fn dead_zone_step() {
    // 1 + 1.6 * [x > 0.6]: positive everywhere (no reversal), nondecreasing
    // (monotone), flat tails (saturating). Low bin is zero below the
    // threshold and 0.5 above, high bin the step itself: ratio 0.5 / 2.6.
    let c = curve(|x| 1.0 + if x > 0.6 { 1.6 } else { 0.0 });
    let low = curve(|x| if x > 0.6 { 0.5 } else { 0.0 });
    let f = flags(&c, &low, &c);
    assert!(f.monotone);
    assert!(f.saturating);
    assert!(!f.regime_reversal);
    assert!(f.threshold_activation);
    assert!((f.stats.regime_ratio - 0.5 / 2.6).abs() < 1e-15);
}

#[test]
fn v_shape_with_sign_flip() {
    // |x| - 1: 40 falling and 40 rising steps, so half the steps violate
    // whichever direction wins; crosses zero at +-1. Tail range 2 - 0.575 =
    // 1.425 over middle range 0.5 - (-1) = 1.5. Low bin is the negated half
    // curve: ratio 0.5.
    let c = curve(|x| x.abs() - 1.0);
    let f = flags(&c, &scaled(&c, -0.5), &c);
    assert!(!f.monotone);
    assert!(!f.saturating);
    assert!(f.regime_reversal);
    assert!(!f.threshold_activation);
    assert!((f.stats.violation_frac - 0.5).abs() < 1e-15);
    assert!((f.stats.tail_ratio_lo - 0.95).abs() < 1e-9);
    assert!((f.stats.regime_ratio - 0.5).abs() < 1e-15);
}

#[test]
fn boundary_values_are_exclusive() {
    // exactly 8 of 80 steps against the trend is a 10% violation rate: not monotone
    let mut c = curve(|x| x);
    for i in 0..8 {
        c[10 * i + 1] = c[10 * i] - 0.01;
        c[10 * i + 2] = c[10 * i + 1] + 0.2;
    }
    assert_eq!(analysis::violation_fraction(&c), 0.1);
    assert!(!flags(&c, &c, &c).monotone);
    // ratio exactly 0.40 is not threshold activation
    let high = vec![1.0; 81];
    let low = vec![0.4; 81];
    assert!(!flags(&high, &low, &high).threshold_activation);
}

#[test]
fn degenerate_inputs() {
    let z = vec![0.0; 81];
    let f = flags(&z, &z, &z);
    assert_eq!(f.stats.regime_ratio, f64::INFINITY);
    assert_eq!(f.stats.tail_ratio_lo, f64::INFINITY);
    assert!(!f.threshold_activation && !f.saturating);
    assert!(f.regime_reversal);
    assert!(f.any_nonlinear());
    assert!(analysis::classify(&[1.0, 2.0, 3.0], &[0.0; 3], &[0.0; 3]).is_err());
}

proptest! {
    #[test]
    fn flags_are_invariant_to_positive_rescaling(
        pts in prop::collection::vec(-5.0f64..5.0, 3 * 81),
        s in 0.01f64..100.0,
    ) {
        let (a, rest) = pts.split_at(81);
        let (l, h) = rest.split_at(81);
        let f = flags(a, l, h);
        let g = flags(&scaled(a, s), &scaled(l, s), &scaled(h, s));
        prop_assert_eq!(
            (f.monotone, f.threshold_activation, f.saturating, f.regime_reversal),
            (g.monotone, g.threshold_activation, g.saturating, g.regime_reversal)
        );
    }

    #[test]
    fn flags_are_a_function_of_the_statistics(pts in prop::collection::vec(-5.0f64..5.0, 3 * 20)) {
        let (a, rest) = pts.split_at(20);
        let (l, h) = rest.split_at(20);
        let f = flags(a, l, h);
        prop_assert_eq!(f.stats.flags(), f);
    }
}
