use mtf::analysis::{bv_partition, tv_order, verify_deterministic_bound};
use mtf::estimator::{fit, fit_naive, FitConfig, PointRule, Variant};
use mtf::interval::Interval;
use mtf::polyfit::projection_fit_at;
use mtf::{fit_boundary, fit_left_boundary, solve_tvd};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn well_posed_and_point_inside(y in series(), r in 0usize..4, lam in 0.0f64..20.0) {
        for variant in [Variant::Full, Variant::Dyadic, Variant::Boundary, Variant::BoundaryDyadic] {
            let band = fit(&y, &FitConfig::new(r, lam, variant)).unwrap();
            for i in 0..y.len() {
                prop_assert!(band.lower[i] <= band.upper[i] + 1e-9);
                prop_assert!(band.lower[i] <= band.point[i] && band.point[i] <= band.upper[i]);
            }
        }
    }

    #[test]
    fn negation_swaps_sides(y in series(), r in 0usize..3, lam in 0.0f64..5.0) {
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        for variant in [Variant::Full, Variant::Dyadic] {
            let cfg = FitConfig::new(r, lam, variant);
            let a = fit(&y, &cfg).unwrap();
            let b = fit(&neg, &cfg).unwrap();
            for i in 0..y.len() {
                prop_assert!((a.lower[i] + b.upper[i]).abs() <= 1e-9);
                prop_assert!((a.upper[i] + b.lower[i]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn shift_equivariance(y in series(), r in 0usize..3, lam in 0.0f64..5.0, c in -50.0f64..50.0) {
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        for variant in [Variant::Full, Variant::Dyadic] {
            let cfg = FitConfig::new(r, lam, variant);
            let a = fit(&y, &cfg).unwrap();
            let b = fit(&shifted, &cfg).unwrap();
            for i in 0..y.len() {
                prop_assert!((a.lower[i] + c - b.lower[i]).abs() <= 1e-9 * (1.0 + c.abs()));
                prop_assert!((a.upper[i] + c - b.upper[i]).abs() <= 1e-9 * (1.0 + c.abs()));
            }
        }
    }

    #[test]
    fn partition_leaves_meet_budget(y in prop::collection::vec(-5.0f64..5.0, 3..80), r in 1usize..3, delta in 0.01f64..1.5) {
        let parts = bv_partition(&y, r, delta).unwrap();
        let v = tv_order(&y, r).unwrap();
        let mut sub = 0.0;
        let n = y.len() as f64;
        for p in &parts {
            let piece = &y[p.range()];
            if piece.len() > r {
                prop_assert!(tv_order(piece, r).unwrap() <= v * delta + 1e-9);
                let d = (piece.len() as f64 / n).powi(r as i32 - 1);
                sub += tv_order(piece, r).unwrap() / d;
            }
        }
        prop_assert!(sub <= v + 1e-9 * (1.0 + v));
    }
}

#[test]
fn localization_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.random_range(4..30);
        let mut y = gaussian(&mut rng, n);
        let i = rng.random_range(1..=n);
        let a = rng.random_range(1..=i);
        let b = rng.random_range(i..=n);
        let j = Interval::new(a, b).unwrap();
        let r = rng.random_range(0..3);
        let lam = rng.random_range(0.0..4.0);
        for t in 1..=n {
            if !j.contains(t) {
                y[t - 1] = rng.random_range(-100.0..100.0);
            }
        }
        let mut inner = f64::NEG_INFINITY;
        for c in a..=i {
            for d in i..=b {
                let iv = Interval::new(c, d).unwrap();
                let cij = mtf::interval::penalty_coefficient(&iv, &j).unwrap() as f64;
                inner = inner.max(projection_fit_at(&y, &iv, r, i).unwrap() - lam * cij / iv.len() as f64);
            }
        }
        let up = mtf::minmax_upper(&y, r, lam, i).unwrap();
        assert!(up <= inner + 1e-9);
    }
}

#[test]
fn dyadic_matches_naive_up_to_128() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1usize, 2, 3, 5, 8, 13, 31, 64, 100, 128] {
        let y = gaussian(&mut rng, n);
        for r in 0..=3 {
            for lam in [0.0, 0.7, 9.0] {
                for variant in [Variant::Dyadic, Variant::BoundaryDyadic] {
                    let cfg = FitConfig::new(r, lam, variant);
                    let a = fit(&y, &cfg).unwrap();
                    let b = fit_naive(&y, &cfg).unwrap();
                    for i in 0..n {
                        assert!((a.lower[i] - b.lower[i]).abs() <= 1e-9, "n={n} r={r} i={i}");
                        assert!((a.upper[i] - b.upper[i]).abs() <= 1e-9, "n={n} r={r} i={i}");
                    }
                }
            }
        }
    }
}

#[test]
fn fused_lasso_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..60 {
        let n = rng.random_range(2..40);
        let y = gaussian(&mut rng, n);
        let lam = 10f64.powf(rng.random_range(-2.0..1.0));
        let theta = solve_tvd(&y, lam).unwrap();
        let band = fit(&y, &FitConfig::new(0, 2.0 * lam, Variant::Full)).unwrap();
        for i in 0..n {
            assert!(band.lower[i] - 1e-8 <= theta[i] && theta[i] <= band.upper[i] + 1e-8);
        }
        let b = fit_boundary(&y, 0, lam).unwrap();
        assert!(b.lower - 1e-8 <= theta[n - 1] && theta[n - 1] <= b.upper + 1e-8);
        let b = fit_left_boundary(&y, 0, lam).unwrap();
        assert!(b.lower - 1e-8 <= theta[0] && theta[0] <= b.upper + 1e-8);
    }
}

#[test]
fn deterministic_bounds_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let n = rng.random_range(1..40);
        let theta: Vec<f64> = (1..=n).map(|t| (t as f64 / 5.0).sin() * 2.0).collect();
        let eps = gaussian(&mut rng, n);
        let r = rng.random_range(0..3);
        for lam in [0.1, 1.0, 10.0] {
            for variant in [Variant::Full, Variant::Dyadic, Variant::Boundary, Variant::BoundaryDyadic] {
                let rep = verify_deterministic_bound(&theta, &eps, &FitConfig::new(r, lam, variant)).unwrap();
                assert!(rep.all_ok(), "{variant:?} n={n} r={r} lam={lam}: {:?}",
                    rep.diagnostics.iter().find(|d| !(d.lower_bound_ok && d.upper_bound_ok)));
            }
        }
    }
}

#[test]
fn left_boundary_is_reflection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [1usize, 4, 17, 64] {
        let y = gaussian(&mut rng, n);
        let rev: Vec<f64> = y.iter().rev().copied().collect();
        for r in 0..3 {
            let a = fit_left_boundary(&y, r, 0.9).unwrap();
            let b = fit_boundary(&rev, r, 0.9).unwrap();
            assert_eq!(a, b);
            // The band's own endpoint uses the direct left-anchored chain.
            let band = fit(&y, &FitConfig::new(r, 0.9, Variant::Boundary)).unwrap();
            assert!((band.lower[0] - a.lower).abs() < 1e-9);
            assert!((band.upper[0] - a.upper).abs() < 1e-9);
        }
    }
}

#[test]
fn point_rules_pick_sides() {
    let y = [0.0, 1.0, 0.5, 3.0, 2.0];
    let base = FitConfig::new(0, 1.0, Variant::Full);
    let up = fit(&y, &base.with_point_rule(PointRule::Upper)).unwrap();
    let lo = fit(&y, &base.with_point_rule(PointRule::Lower)).unwrap();
    assert_eq!(up.point, up.upper);
    assert_eq!(lo.point, lo.lower);
}
