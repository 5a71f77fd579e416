mod common;

use useqd::bounds::{
    bounds_report, corollary1_lower, gershgorin_interval, helstrom_error, mixed_bounds_report,
    theorem1_lower, theorem1_mixed_lower, theorem2_objective, theorem2_upper, theorem3_lower,
    BlockPolicy, BoundsError, BoundsOptions,
};
use num_complex::Complex64;
use useqd::ensembles::{gen_random, gen_two_state, overlaps, MixedEnsemble, PureEnsemble};
use useqd::linalg::CVector;
use useqd::linalg::{ceil_tol, TolerancePolicy};
use useqd::strategy::StrategyOptions;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn reference_values() {
    assert!(close(theorem1_lower(0.5, 0.0).unwrap(), 0.2642, 1e-4));
    assert!(close(theorem1_lower(0.9, 0.0).unwrap(), 1.738, 1e-3));
    assert_eq!(theorem1_lower(0.5, 1.0).unwrap(), 0.0);
    assert!(close(theorem1_mixed_lower(0.25, 0.0).unwrap(), theorem1_lower(0.5, 0.0).unwrap(), 1e-15));
    assert!(close(theorem3_lower(0.5, 0.0).unwrap(), 0.02576, 1e-5));
    let t3 = (0.5f64 - 0.7 / 6.0).powi(2) / (-7.0 * 0.81f64.ln());
    assert!(close(theorem3_lower(0.9, 0.1).unwrap(), t3, 1e-15));
    assert!(close(t3, 0.0998, 5e-4));
    assert!(theorem3_lower(0.5, 3.0 / 7.0).unwrap().abs() < 1e-15);
    assert!(close(corollary1_lower(2, 0.6), 0.1, 1e-15));
    assert!(close(corollary1_lower(4, 0.6), 0.05, 1e-15));
    assert_eq!(corollary1_lower(3, 0.0), 0.0);

    let t = theorem2_upper(2, 0.5, 0.0).unwrap();
    assert!(close(t.value, 2.0 / 2f64.ln(), 1e-9));
    assert!(t.at_boundary);
    assert_eq!(theorem2_upper(5, 0.5, 1.0).unwrap().value, 0.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(theorem1_lower(0.0, 0.0), Err(BoundsError::OverlapDegenerate(_))));
    assert!(matches!(theorem1_lower(1.0, 0.0), Err(BoundsError::OverlapDegenerate(_))));
    assert!(theorem1_lower(0.5, 1.5).is_err());
    assert!(matches!(theorem3_lower(0.5, 0.5), Err(BoundsError::PeOutOfRange(_))));
    assert!(theorem2_upper(1, 0.5, 0.0).is_err());
    assert!(theorem2_upper(3, 0.0, 0.0).is_err());
}

#[test]
fn theorem2_matches_grid_oracle_at_n8() {
    let c = 0.5;
    let t = theorem2_upper(8, c, 0.0).unwrap();
    // independent dense grid
    let grid = (1..200_000)
        .map(|i| theorem2_objective(8, c, i as f64 / 200_000.0))
        .fold(f64::INFINITY, f64::min);
    assert!(t.value <= grid + 1e-9);
    assert!(grid - t.value < 1e-6);
    assert!(!t.at_boundary);
    assert!(t.value >= theorem1_lower(c, 0.0).unwrap());

    // eight states with every pairwise overlap exactly c
    let dim = 9;
    let cols: Vec<CVector> = (1..=8)
        .map(|i| {
            let mut v = CVector::zeros(dim);
            v[0] = Complex64::new(c.sqrt(), 0.0);
            v[i] = Complex64::new((1.0 - c).sqrt(), 0.0);
            v
        })
        .collect();
    let e = PureEnsemble::from_unnormalized(&cols).unwrap();
    assert!(close(common::max_overlap(&e), c, 1e-12));
    let r = bounds_report(
        &e,
        &BoundsOptions { block: BlockPolicy::Delta(t.argmin_delta), ..Default::default() },
        &TolerancePolicy::default(),
    )
    .unwrap();
    assert_eq!(r.k, 6);
    assert!(close(r.closed_form_el, 6.0 / (1.0 - c.powi(6)), 1e-9));
    assert!(r.closed_form_el <= t.value);
    assert!(r.passed(), "{}", r.to_json());
}

#[test]
fn monotonicity() {
    let mut prev = f64::INFINITY;
    for i in 0..=10 {
        let v = theorem1_lower(0.6, i as f64 / 10.0).unwrap();
        assert!(v <= prev);
        prev = v;
    }
    let mut prev = 0.0;
    for i in 1..20 {
        let v = theorem1_lower(i as f64 / 20.0, 0.0).unwrap();
        assert!(v > prev);
        prev = v;
    }
    let mut prev = 0.0;
    for n in 2..40 {
        let v = theorem2_upper(n, 0.6, 0.1).unwrap().value;
        assert!(v >= prev - 1e-9, "N={n}");
        prev = v;
    }
}

#[test]
fn corollary_equals_helstrom_for_pure_pairs() {
    let pol = TolerancePolicy::default();
    for seed in 0..50 {
        let e = gen_random(2, 3, 700 + seed).unwrap();
        let c = common::max_overlap(&e);
        let m = MixedEnsemble::from_pure(&e);
        let h = helstrom_error(&m.states()[0], &m.states()[1], 0.5, &pol).unwrap();
        assert!(close(h, corollary1_lower(2, c), 1e-10), "seed {seed}");
        assert!(h >= corollary1_lower(2, c) - 1e-12);
    }
}

#[test]
fn gershgorin_contains_gram_spectrum() {
    for seed in 0..30 {
        let e = gen_random(3, 4, 900 + seed).unwrap();
        let c = common::max_overlap(&e);
        for k in 1..4 {
            let s = common::block_spectrum(&e, k);
            let (lo, hi) = gershgorin_interval(3, c, k);
            assert!(s.min_pos.unwrap() >= lo - 1e-10);
            assert!(s.max <= hi + 1e-10);
        }
    }
}

#[test]
fn report_orders_hold_on_random_ensembles() {
    let pol = TolerancePolicy::default();
    for seed in 0..40 {
        let n = 2 + (seed as usize) % 3;
        let e = gen_random(n, 4, 300 + seed).unwrap();
        let r = bounds_report(&e, &BoundsOptions { block: BlockPolicy::Fixed(1), ..Default::default() }, &pol)
            .unwrap();
        let oracle = common::closed_form_el(&e, 1).unwrap();
        assert!(close(r.closed_form_el, oracle, 1e-9 * oracle));
        assert!(r.th1_lower <= ceil_tol(r.closed_form_el));
        assert!(r.closed_form_el <= r.lemma4_upper + 1e-9);
    }
}

#[test]
fn two_state_report() {
    let e = gen_two_state(0.5).unwrap();
    let r = bounds_report(&e, &BoundsOptions::default(), &TolerancePolicy::default()).unwrap();
    assert!(close(r.th1_lower, 0.2642, 1e-4));
    assert!(close(r.th2_upper.value, 2.885, 1e-3));
    assert!(close(r.closed_form_el, 2.0, 1e-9));
    assert!(close(r.lemma4_upper, 3.0, 1e-9));
    assert!(r.passed());

    let d = bounds_report(&gen_two_state(0.0).unwrap(), &BoundsOptions::default(), &TolerancePolicy::default())
        .unwrap();
    assert!(d.degenerate);
    assert_eq!(d.th1_lower, 0.0);
    assert!(close(d.closed_form_el, 1.0, 1e-12));
}

#[test]
fn mixed_report_reduces_to_pure() {
    let e = gen_random(3, 3, 41).unwrap();
    let m = MixedEnsemble::from_pure(&e);
    let r = mixed_bounds_report(&m, 0.0, &StrategyOptions::default()).unwrap();
    let c = overlaps(&e).max_abs_overlap;
    let t1 = theorem1_lower(c, 0.0).unwrap();
    assert!(close(r.th1_mixed_lower, t1, 1e-9), "{} vs {t1}, F = {} vs {}", r.th1_mixed_lower, r.max_fidelity, c * c);
    assert!(r.warnings.is_empty());
    let el = common::closed_form_el(&e, 1).unwrap();
    assert!(close(r.closed_form_el.unwrap(), el, 1e-8 * el));
}
