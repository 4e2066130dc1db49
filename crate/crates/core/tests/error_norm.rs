mod common;

use approx::assert_relative_eq;
use common::frozen;
use optquad_core::error_norm::*;
use optquad_core::rules::{builtin, optimal_rule, Grid, WeightKind};
use optquad_core::Execution;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn breakdown_at_unit_step() {
    let b = norm_sq_bruteforce(&optimal_rule(Grid::new(1).unwrap())).unwrap();
    assert_relative_eq!(b.a1, frozen::A1_H1, max_relative = 1e-13);
    assert_relative_eq!(b.a2, frozen::A2_H1, max_relative = 1e-14);
    assert_relative_eq!(b.a3, frozen::A3_H1, max_relative = 1e-14);
    assert_relative_eq!(b.a4, frozen::A4, max_relative = 1e-14);
    assert_relative_eq!(b.total, frozen::NORM_SQ_H1, max_relative = 1e-13);
}

#[test]
fn three_routes_agree() {
    for n in [1usize, 2, 3, 5, 10, 25, 50, 100] {
        let h = 1.0 / n as f64;
        let brute = norm_sq_bruteforce(&optimal_rule(Grid::new(n).unwrap()))
            .unwrap()
            .total;
        let closed = norm_sq_closed(h).unwrap();
        let series = norm_sq_series(h, 1e-16).unwrap();
        let tol = if n <= 10 { 1e-12 } else { 1e-8 };
        assert!(
            rel(brute, closed) <= tol,
            "n={n} brute={brute} closed={closed}"
        );
        assert!(rel(brute, series) <= tol, "n={n}");
        assert!(rel(closed, series) <= tol, "n={n}");
    }
    assert_relative_eq!(
        norm_sq_closed(0.5).unwrap(),
        frozen::NORM_SQ_H05,
        max_relative = 1e-13
    );
    assert_relative_eq!(
        norm_sq_closed(0.1).unwrap(),
        frozen::NORM_SQ_H01,
        max_relative = 1e-13
    );
}

#[test]
fn leading_constant() {
    for (n, tol) in [(10usize, 3e-3), (100, 3e-5)] {
        let h = 1.0 / n as f64;
        let total = norm_sq_bruteforce(&optimal_rule(Grid::new(n).unwrap()))
            .unwrap()
            .total;
        assert!((total * 720.0 / h.powi(4) - 1.0).abs() <= tol);
    }
}

#[test]
fn below_euler_maclaurin() {
    for h in [1.0, 0.5, 0.1, 0.01] {
        let ratio = norm_sq_closed(h).unwrap() / em_norm_sq(h);
        assert!(ratio > 0.9 && ratio < 1.0, "h={h} ratio={ratio}");
    }
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let rule = optimal_rule(Grid::new(64).unwrap());
    let a = norm_sq_bruteforce_with(&rule, Execution::Sequential).unwrap();
    let b = norm_sq_bruteforce_with(&rule, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn perturbations_never_help() {
    for n in [1usize, 5, 20] {
        let r = perturbation_study(
            &optimal_rule(Grid::new(n).unwrap()),
            100,
            1e-3,
            7 + n as u64,
        )
        .unwrap();
        assert_eq!(r.trials, 100);
        assert!(r.min_increase >= -1e-12, "n={n} {r:?}");
    }
}

#[test]
fn constraint_violation_is_reported() {
    let rule = optimal_rule(Grid::new(4).unwrap())
        .perturbed(WeightKind::Derivative, 0, 1e-3)
        .unwrap();
    assert!(norm_sq_bruteforce(&rule).is_err());
    assert!(extremal_pairing(&rule, 1000).is_err());
}

#[test]
fn extremal_function_attains_the_norm() {
    for n in [1usize, 2, 5] {
        let rule = optimal_rule(Grid::new(n).unwrap());
        let pairing = extremal_pairing(&rule, 4096).unwrap();
        let closed = norm_sq_closed(1.0 / n as f64).unwrap();
        assert!(
            (pairing - closed).abs() <= 1e-8 * closed.max(1e-12) + 1e-15,
            "n={n}"
        );
    }
}

#[test]
fn extremal_asymmetry_is_measured() {
    // reported, not bounded: the functional is not reflection invariant
    let a = extremal_asymmetry(&optimal_rule(Grid::new(4).unwrap()), 64).unwrap();
    assert!(a.is_finite() && a >= 0.0);
}

#[test]
fn seminorm_of_square() {
    let s = w21_seminorm(&builtin("xsq").unwrap()).unwrap();
    assert_relative_eq!(s, (28.0f64 / 3.0).sqrt(), max_relative = 1e-14);
    assert_eq!(w21_seminorm(&builtin("expm").unwrap()).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn null_space_does_not_change_pairing(n in 1usize..6, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let rule = optimal_rule(Grid::new(n).unwrap());
        let base = |x: f64| eval_extremal_function(&rule, x).unwrap();
        let dbase = |x: f64| eval_extremal_derivative(&rule, x).unwrap();
        let p0 = functional_value(&rule, base, dbase, 2048);
        let p1 = functional_value(&rule, |x| base(x) + a + b * (-x).exp(), |x| dbase(x) - b * (-x).exp(), 2048);
        prop_assert!((p0 - p1).abs() <= 1e-12);
    }

    #[test]
    fn closed_norm_positive_and_bounded(h in 1e-3f64..=1.0) {
        let v = norm_sq_closed(h).unwrap();
        prop_assert!(v > 0.0 && v < em_norm_sq(h));
    }
}
