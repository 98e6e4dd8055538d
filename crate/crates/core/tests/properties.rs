//! Property tests tying the exact algebra, the product-form evaluators, and
//! the serialization wires together.

use num_rational::{BigRational, Ratio};
use proptest::collection::vec;
use proptest::prelude::*;
use riesz_core::approx::BernsteinPoly;
use riesz_core::dyadic::{ComplexDyadic, Dyadic};
use riesz_core::lacunary::{EpsVector, LacunarySeq};
use riesz_core::moments::exact_power_mean;
use riesz_core::quadrature::{adaptive_mean, PolyGridFn, RieszSumEvaluator};
use riesz_core::riesz::{riesz_product, weighted_sum, WeightChoice, WeightSpec};
use riesz_core::trigpoly::{ENorm, TrigPoly, DEFAULT_PAIR_BUDGET};

const TAU: f64 = std::f64::consts::TAU;

fn geometric(base: i64, ratio: i64, len: usize) -> LacunarySeq {
    LacunarySeq::make(base, Ratio::from_integer(ratio), len, None).unwrap()
}

/// Random real-symmetric exact polynomial of small degree.
fn symmetric_poly() -> impl Strategy<Value = TrigPoly> {
    vec((-8i64..=8, 0u32..4), 0..6).prop_map(|spec| {
        let mut terms = Vec::new();
        for (deg_slot, (num, exp)) in spec.into_iter().enumerate() {
            let n = deg_slot as i64;
            let c = Dyadic::ratio(num, exp);
            if n == 0 {
                terms.push((0, ComplexDyadic::real(c)));
            } else {
                terms.push((n, ComplexDyadic::real(c.clone())));
                terms.push((-n, ComplexDyadic::real(c)));
            }
        }
        TrigPoly::from_exact_terms(terms)
    })
}

proptest! {
    #[test]
    fn dyadic_roundtrips_every_finite_float(x in any::<f64>()) {
        prop_assume!(x.is_finite());
        let d = Dyadic::from_f64_exact(x).unwrap();
        prop_assert_eq!(d.to_f64(), x);
    }

    #[test]
    fn geometric_sequences_validate(
        base in 1i64..50,
        ratio in 3i64..6,
        len in 1usize..8,
    ) {
        let seq = LacunarySeq::make(base, Ratio::from_integer(ratio), len, None).unwrap();
        prop_assert_eq!(seq.len(), len);
        let m = seq.modes();
        for j in 1..len {
            prop_assert!(m[j] >= ratio * m[j - 1]);
        }
    }

    #[test]
    fn riesz_coefficients_follow_the_support_law(n_upper in 0usize..6) {
        let seq = geometric(3, 3, 6);
        let r = riesz_product(&seq, n_upper).unwrap();
        prop_assert_eq!(r.term_count(), 3usize.pow(n_upper as u32));
        for freq in r.frequencies() {
            let eps = seq.lift_frequency(freq, 1).unwrap();
            let eps = eps.expect("every product frequency lifts");
            let support = eps.support_size() as u32;
            let expect = ComplexDyadic::real(Dyadic::ratio(1, support));
            prop_assert_eq!(r.coeff_exact(freq).unwrap(), expect);
        }
    }

    #[test]
    fn evaluator_agrees_with_expansion(
        ws in vec(-2.0f64..2.0, 1..5),
        ti in 0u32..64,
    ) {
        let seq = geometric(3, 3, 4);
        let weights: Vec<Vec<f64>> = ws.iter().map(|w| vec![*w]).collect();
        let f = weighted_sum(&seq, &weights, ENorm::L2).unwrap();
        let ev = RieszSumEvaluator::new(&seq, &weights).unwrap();
        let t = TAU * ti as f64 / 64.0;
        let mut out = [0.0];
        ev.coords_at(t, &mut out);
        prop_assert!((out[0] - f.coord(0).evaluate_real(t)).abs() < 1e-9);
    }

    #[test]
    fn weight_density_stays_in_unit_interval(
        k in 1u32..3,
        p in 1.0f64..4.0,
        picks in vec(0u8..3, 0..4),
        ti in 0u32..64,
    ) {
        let seq = geometric(2, 3, 4);
        let choices: Vec<WeightChoice> = picks
            .iter()
            .map(|c| match c {
                0 => WeightChoice::One,
                1 => WeightChoice::HalfPhi,
                _ => WeightChoice::OneMinusHalfPhi,
            })
            .collect();
        let spec = WeightSpec::new(k, choices.len(), p, choices).unwrap();
        let g = spec.eval(&seq, TAU * ti as f64 / 64.0);
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn square_mean_dominates_mean_square(f in symmetric_poly()) {
        let m1 = exact_power_mean(&f, 1, DEFAULT_PAIR_BUDGET).unwrap();
        let m2 = exact_power_mean(&f, 2, DEFAULT_PAIR_BUDGET).unwrap();
        prop_assert!(m2 >= &m1 * &m1, "mean f^2 = {m2} < (mean f)^2 for {m1}");
    }

    #[test]
    fn grid_mean_matches_zero_coefficient(f in symmetric_poly()) {
        let grid = PolyGridFn::new(&f);
        let est = adaptive_mean(&grid, 1e-10, 1 << 14).unwrap();
        let exact = exact_power_mean(&f, 1, DEFAULT_PAIR_BUDGET).unwrap();
        let exact_f = riesz_core::moments::rational_to_f64(&exact);
        prop_assert!(
            (est.value - exact_f).abs() <= 1e-8 * exact_f.abs().max(1.0),
            "{} vs {exact_f}",
            est.value
        );
    }

    #[test]
    fn lift_inverts_frequency_map(digits in vec(-2i32..=2, 5)) {
        // Ratio 5 separates order-2 digit vectors.
        let seq = geometric(1, 5, 5);
        let eps = EpsVector(digits);
        let freq = eps.frequency(&seq).unwrap();
        let lifted = seq.lift_frequency(freq, 2).unwrap().unwrap();
        prop_assert_eq!(lifted, eps);
    }

    #[test]
    fn bernstein_stays_in_sample_hull(samples in vec(-1.0f64..1.0, 2..40), xi in 0u32..101) {
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let b = BernsteinPoly::from_samples(samples).unwrap();
        let x = xi as f64 / 100.0;
        let v = b.eval(x);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12, "{v} outside [{lo}, {hi}]");
    }

    #[test]
    fn sequence_wire_roundtrip(base in 1i64..20, len in 1usize..7) {
        let seq = geometric(base, 3, len);
        let json = serde_json::to_string(&seq).unwrap();
        let back: LacunarySeq = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn poly_wire_roundtrip(f in symmetric_poly()) {
        let json = serde_json::to_string(&f).unwrap();
        let back: TrigPoly = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &f);
        // Float mode serializes and returns float mode.
        let fl = f.to_float();
        let json = serde_json::to_string(&fl).unwrap();
        let back: TrigPoly = serde_json::from_str(&json).unwrap();
        prop_assert!(!back.is_exact());
    }

    #[test]
    fn riesz_product_mean_is_one_and_nonnegative(
        n_upper in 0usize..5,
        ti in 0u32..128,
    ) {
        let seq = geometric(3, 3, 5);
        let r = riesz_product(&seq, n_upper).unwrap();
        let mean = exact_power_mean(&r, 1, DEFAULT_PAIR_BUDGET).unwrap();
        prop_assert_eq!(mean, BigRational::from_integer(1.into()));
        let t = TAU * ti as f64 / 128.0;
        prop_assert!(r.evaluate_real(t) >= -1e-10);
    }
}
