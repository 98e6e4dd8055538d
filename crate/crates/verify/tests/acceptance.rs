//! Acceptance gate: one test per release criterion, each run at its stated
//! tolerance and wall-clock cap.

use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riesz_core::dyadic::Dyadic;
use riesz_core::lacunary::LacunarySeq;
use riesz_core::moments::{
    mean_quadrature, rational_to_f64, riesz_moment_quadrature, riesz_moment_rational, x_moment,
};
use riesz_core::quadrature::{ClosureGridFn, DEFAULT_MAX_POINTS};
use riesz_core::riesz::riesz_product;
use riesz_core::trigpoly::{ENorm, DEFAULT_PAIR_BUDGET};
use riesz_verify::constants::{lambda_pack, L1_LOWER_FLOOR};
use riesz_verify::lemmas::CheckCtx;
use riesz_verify::montecarlo::check_montecarlo;
use riesz_verify::suites::{run_statement, run_suite, Suite, SuiteConfig};
use riesz_verify::theorem::{check_main_theorem, formula_candidates, SearchGrid};
use riesz_verify::transfer::check_phase_average_contraction;
use riesz_verify::{render_csv, render_jsonl, CheckResult};

fn seq3(len: usize) -> LacunarySeq {
    LacunarySeq::make(3, Ratio::from_integer(3), len, None).unwrap()
}

fn assert_all_pass(rows: &[CheckResult], what: &str) {
    assert!(!rows.is_empty(), "{what}: no rows");
    for row in rows {
        assert!(
            row.pass,
            "{what}: {} [{}] lhs={:e} rhs={:e} margin={:e}",
            row.statement_id, row.instance, row.lhs, row.rhs, row.margin
        );
    }
}

#[test]
fn criterion_1_structure_exactness() {
    let start = Instant::now();
    let seq = seq3(8);
    let modes = seq.modes().to_vec();
    for n in 0..=8usize {
        let r = riesz_product(&seq, n).unwrap();
        assert_eq!(r.frequencies().len(), 3usize.pow(n as u32), "N={n}");
        for code in 0..3u32.pow(n as u32) {
            let mut rest = code;
            let mut freq = 0i64;
            let mut support = 0u32;
            for mode in modes.iter().take(n) {
                let eps = match rest % 3 {
                    0 => 0i64,
                    1 => 1,
                    _ => -1,
                };
                rest /= 3;
                if eps != 0 {
                    support += 1;
                }
                freq += eps * mode;
            }
            let coeff = r
                .coeff_exact(freq)
                .unwrap_or_else(|| panic!("N={n}: missing frequency {freq}"));
            assert!(coeff.im.is_zero(), "N={n} freq={freq}");
            assert_eq!(
                coeff.re,
                Dyadic::ratio(1, support),
                "N={n} freq={freq} support={support}"
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "structure scan took {elapsed:.2}s");
}

#[test]
fn criterion_2_oracle_agreement() {
    let seq = seq3(5);
    for p in [2u32, 4, 6] {
        for n in 0..=5usize {
            let exact = rational_to_f64(&riesz_moment_rational(&seq, n, p, DEFAULT_PAIR_BUDGET).unwrap());
            let quad = riesz_moment_quadrature(&seq, n, f64::from(p), 1e-10).unwrap();
            let rel = (quad.value - exact).abs() / exact;
            assert!(rel <= 1e-8, "p={p} N={n}: rel diff {rel:e}");
        }
    }
    for p in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0] {
        let formula = x_moment(p).unwrap().value;
        let grid = ClosureGridFn::new(|t: f64| (1.0 + t.cos()).max(0.0).powf(p), 1 << 14);
        let quad = mean_quadrature(&grid, 1e-13, DEFAULT_MAX_POINTS).unwrap();
        let diff = (formula - quad.value).abs();
        assert!(diff <= 1e-10, "p={p}: formula {formula} vs quadrature {} (diff {diff:e})", quad.value);
    }
}

#[test]
fn criterion_3_first_moment_floor() {
    let start = Instant::now();
    let ctx = CheckCtx::default();
    let seq = seq3(6);
    let n_upper = 6usize;
    let mut min_ratio = f64::INFINITY;
    let scalar = SearchGrid::build(&seq, n_upper, ENorm::L2, 1, 1.0, &ctx).unwrap();
    for code in 0..(1u32 << (n_upper + 1)) {
        let coeffs: Vec<Vec<f64>> = (0..=n_upper)
            .map(|k| vec![if code >> k & 1 == 1 { -1.0 } else { 1.0 }])
            .collect();
        let ratio = scalar.ratio(&coeffs);
        assert!(ratio.is_finite());
        assert!(ratio >= L1_LOWER_FLOOR, "sign code {code}: ratio {ratio:e}");
        min_ratio = min_ratio.min(ratio);
    }
    for (which, e_norm) in [ENorm::L1, ENorm::L2, ENorm::Linf].into_iter().enumerate() {
        let grid = SearchGrid::build(&seq, n_upper, e_norm, 3, 1.0, &ctx).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        rng.set_stream(900 + which as u64);
        for trial in 0..1000u32 {
            let coeffs: Vec<Vec<f64>> = (0..=n_upper)
                .map(|_| (0..3).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                .collect();
            let ratio = grid.ratio(&coeffs);
            assert!(ratio.is_finite(), "{} trial {trial}", e_norm.label());
            assert!(
                ratio >= L1_LOWER_FLOOR,
                "{} trial {trial}: ratio {ratio:e}",
                e_norm.label()
            );
            min_ratio = min_ratio.min(ratio);
        }
    }
    println!("criterion 3: observed minimum lower ratio {min_ratio:.6e} (floor {L1_LOWER_FLOOR:e})");
    assert!(min_ratio >= L1_LOWER_FLOOR);
    assert!(min_ratio > 100.0 * L1_LOWER_FLOOR, "minimum unexpectedly close to the floor");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "floor sweep took {elapsed:.1}s");
}

#[test]
fn criterion_4_upper_bound_constants() {
    let start = Instant::now();
    let ctx = CheckCtx::default();
    for p in [1.5f64, 2.0, 3.0] {
        let d = (80.0 * p * p).ceil() as i64;
        let seq = LacunarySeq::make(1, Ratio::from_integer(d), 3, None).unwrap();
        assert!(*seq.modes().last().unwrap() <= 1_000_000, "p={p}: top mode too large");
        let cands = formula_candidates(p);
        let sets: [(&str, Vec<Vec<f64>>); 2] = [
            ("all-ones", vec![vec![1.0]; 4]),
            ("alternating", vec![vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]]),
        ];
        for (label, coeffs) in sets {
            let rows = check_main_theorem(
                &seq,
                &coeffs,
                ENorm::L2,
                p,
                &cands,
                &format!("acceptance p={p} d={d} {label}"),
                &ctx,
            )
            .unwrap();
            let upper = &rows[1];
            assert_eq!(upper.statement_id, "norm-equivalence-upper");
            assert!(
                upper.pass,
                "p={p} {label}: ratio {:e} vs constant {:e}",
                upper.lhs, upper.rhs
            );
            println!(
                "criterion 4: p={p} d={d} {label}: ratio {:.6e} <= {:.6e} (margin {:.6e})",
                upper.lhs, upper.rhs, upper.margin
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "upper battery took {elapsed:.1}s");
}

#[test]
fn criterion_5_lemma_suite_green() {
    let cfg = SuiteConfig::default();
    for id in [
        "split-sum-lower-bound",
        "cos-sin-moment-product",
        "oscillation-decorrelation",
        "exact-factorization",
        "derivative-norm-bound",
        "power-weight-decorrelation",
        "modulated-tail-extraction",
        "two-scale-sup-transfer",
        "iterated-sup-transfer",
        "riesz-fourier-decay",
        "adjacent-block-factorization",
        "mixed-moment-factor-bound",
    ] {
        let rows = run_statement(id, &cfg).unwrap();
        assert_all_pass(&rows, id);
    }
}

#[test]
fn criterion_6_counterexample_growth() {
    let start = Instant::now();
    let rows = run_statement("paired-power-growth", &SuiteConfig::default()).unwrap();
    assert_all_pass(&rows, "counterexample");
    for row in &rows {
        assert_eq!(row.method, "exact", "{}", row.instance);
    }
    let growth = rows
        .iter()
        .filter(|r| r.statement_id == "paired-power-growth")
        .count();
    let floor = rows
        .iter()
        .filter(|r| r.statement_id == "paired-power-floor")
        .count();
    let collision = rows
        .iter()
        .filter(|r| r.statement_id == "collision-strictness")
        .count();
    assert!(growth >= 2, "growth rows: {growth}");
    assert!(floor >= 3, "floor rows: {floor}");
    assert!(collision >= 2, "collision rows: {collision}");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "counterexample battery took {elapsed:.1}s");
}

#[test]
fn criterion_7_approximation_certificates() {
    let cfg = SuiteConfig::default();
    for id in [
        "profile-sandwich",
        "weight-majorant-sandwich",
        "power-contraction",
        "donation-ratio",
    ] {
        let rows = run_statement(id, &cfg).unwrap();
        assert_all_pass(&rows, id);
    }
    for p in [1.25, 1.5, 2.0, 3.0, 4.0] {
        let pack = lambda_pack(p).unwrap();
        assert!(pack.lambda1 < 1.0, "p={p}: lambda1 {}", pack.lambda1);
        assert!(pack.lambda2 < 1.0, "p={p}: lambda2 {}", pack.lambda2);
    }
}

#[test]
fn criterion_8_iid_twin() {
    let ctx = CheckCtx::default();
    let mc = check_montecarlo(&ctx, 100_000).unwrap();
    assert_all_pass(&mc, "montecarlo");
    assert_eq!(
        mc.iter()
            .filter(|r| r.statement_id == "iid-second-moment")
            .count(),
        3
    );
    let contraction = check_phase_average_contraction(&ctx).unwrap();
    assert_all_pass(&contraction, "phase contraction");
    // 10 sampled phases plus the zero phase plus the sample mean per instance.
    assert_eq!(contraction.len() % 12, 0);
}

#[test]
fn criterion_9_determinism() {
    let cfg = SuiteConfig {
        mc_samples: 20_000,
        ..SuiteConfig::default()
    };
    let all = || {
        vec![
            Suite::Riesz,
            Suite::Norms,
            Suite::Verify(None),
            Suite::EstimateConstants,
            Suite::Counterexample,
            Suite::Montecarlo,
            Suite::Transfer,
        ]
    };
    let render_all = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            all()
                .iter()
                .map(|suite| {
                    let outcome = run_suite(suite, &cfg).unwrap();
                    (
                        suite.label().to_string(),
                        render_csv(&outcome.rows),
                        render_jsonl(&outcome.rows),
                        outcome.ledger_json,
                    )
                })
                .collect::<Vec<_>>()
        })
    };
    let single = render_all(1);
    let pooled = render_all(4);
    for (a, b) in single.iter().zip(&pooled) {
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1, "suite {} CSV differs across thread counts", a.0);
        assert_eq!(a.2, b.2, "suite {} JSONL differs across thread counts", a.0);
        assert_eq!(a.3, b.3, "suite {} ledger differs across thread counts", a.0);
    }
}
