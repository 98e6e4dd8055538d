//! Property tests for the certification layer: the moment ratio respects the
//! symmetries of the statements, and the constant search behaves like an
//! anytime estimator.

use num_rational::Ratio;
use proptest::collection::vec;
use proptest::prelude::*;
use riesz_core::lacunary::LacunarySeq;
use riesz_core::trigpoly::ENorm;
use riesz_verify::lemmas::CheckCtx;
use riesz_verify::theorem::{estimate_lower_constant, SearchGrid};

fn seq3(len: usize) -> LacunarySeq {
    LacunarySeq::make(3, Ratio::from_integer(3), len, None).unwrap()
}

/// Scalar coefficient sets with at least one coordinate of visible size.
fn scalar_coeffs() -> impl Strategy<Value = Vec<Vec<f64>>> {
    vec(-5.0f64..5.0, 4)
        .prop_filter("need a nonzero coefficient", |raw| {
            raw.iter().any(|a| a.abs() > 1e-3)
        })
        .prop_map(|raw| raw.into_iter().map(|a| vec![a]).collect())
}

/// Planar coefficient sets with at least one vector of visible size.
fn planar_coeffs() -> impl Strategy<Value = Vec<Vec<f64>>> {
    vec((-5.0f64..5.0, -5.0f64..5.0), 4)
        .prop_filter("need a nonzero vector", |raw| {
            raw.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
        })
        .prop_map(|raw| raw.into_iter().map(|(a, b)| vec![a, b]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    })]

    #[test]
    fn moment_ratio_is_scale_invariant(coeffs in scalar_coeffs(), s in 0.05f64..20.0) {
        let ctx = CheckCtx::default();
        let grid = SearchGrid::build(&seq3(3), 3, ENorm::L2, 1, 2.0, &ctx).unwrap();
        let base = grid.ratio(&coeffs);
        prop_assume!(base.is_finite());
        let scaled: Vec<Vec<f64>> = coeffs
            .iter()
            .map(|v| v.iter().map(|a| s * a).collect())
            .collect();
        let after = grid.ratio(&scaled);
        prop_assert!(
            (base - after).abs() <= 1e-12 * base.max(1.0),
            "{base} vs {after} at scale {s}"
        );
    }

    #[test]
    fn moment_ratio_is_rotation_invariant_in_l2(coeffs in planar_coeffs(), theta in 0.0f64..std::f64::consts::TAU) {
        let ctx = CheckCtx::default();
        let grid = SearchGrid::build(&seq3(3), 3, ENorm::L2, 2, 2.0, &ctx).unwrap();
        let base = grid.ratio(&coeffs);
        prop_assume!(base.is_finite());
        let (c, s) = (theta.cos(), theta.sin());
        let rotated: Vec<Vec<f64>> = coeffs
            .iter()
            .map(|v| vec![c * v[0] - s * v[1], s * v[0] + c * v[1]])
            .collect();
        let after = grid.ratio(&rotated);
        prop_assert!(
            (base - after).abs() <= 1e-10 * base.max(1.0),
            "{base} vs {after} at angle {theta}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 12,
        ..ProptestConfig::default()
    })]

    #[test]
    fn search_envelope_is_ordered_and_brackets_one(seed in any::<u64>()) {
        let ctx = CheckCtx::default();
        let seq = seq3(3);
        let est = estimate_lower_constant(&seq, 2.0, 3, ENorm::L2, 1, 300, seed, 77, &ctx)
            .unwrap_or_else(|_| unreachable!());
        prop_assert!(est.empirical_lower > 0.0);
        prop_assert!(est.empirical_lower <= est.empirical_upper);
        prop_assert!(est.empirical_lower <= 1.0 + 1e-12);
        prop_assert!(est.empirical_upper >= 1.0 - 1e-12);
        let grid = SearchGrid::build(&seq, 3, ENorm::L2, 1, 2.0, &ctx).unwrap();
        let replay = grid.ratio(&est.argmin);
        prop_assert!(
            (replay - est.empirical_lower).abs() <= 1e-12 * est.empirical_lower.max(1.0),
            "argmin replay {replay} vs {}",
            est.empirical_lower
        );
    }

    #[test]
    fn doubling_the_budget_widens_the_envelope(seed in any::<u64>(), budget in 50u64..300) {
        let ctx = CheckCtx::default();
        let seq = seq3(3);
        let small = estimate_lower_constant(&seq, 2.0, 3, ENorm::L2, 1, budget, seed, 78, &ctx)
            .unwrap_or_else(|_| unreachable!());
        let large = estimate_lower_constant(&seq, 2.0, 3, ENorm::L2, 1, 2 * budget, seed, 78, &ctx)
            .unwrap_or_else(|_| unreachable!());
        prop_assert!(large.empirical_lower <= small.empirical_lower);
        prop_assert!(large.empirical_upper >= small.empirical_upper);
    }
}
