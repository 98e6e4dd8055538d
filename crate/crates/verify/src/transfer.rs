//! Phase transfer checks: convolving a phase-shifted cosine product family
//! against a Riesz product halves every amplitude exactly, and the halved
//! partial products contract the L1 norm of any weighted sum.

use std::f64::consts::TAU;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riesz_core::dyadic::Dyadic;
use riesz_core::error::Result;
use riesz_core::lacunary::LacunarySeq;
use riesz_core::moments::mean_quadrature;
use riesz_core::quadrature::{NormPowerGridFn, RieszSumEvaluator};
use riesz_core::riesz::{riesz_product, riesz_shifted};
use riesz_core::trigpoly::{ENorm, TrigPoly};

use crate::check::{quad_slack, CheckResult};
use crate::lemmas::CheckCtx;

const IDENTITY_STREAM: u64 = 11;
const CONTRACTION_STREAM: u64 = 12;

/// Product of halved factors 1 + (1/2)cos(n_j t + psi_j) for j <= n_upper.
fn tilde_product(seq: &LacunarySeq, n_upper: usize, psi: &[f64]) -> Result<TrigPoly> {
    let half = Dyadic::ratio(1, 1);
    let mut acc = TrigPoly::one();
    for (&n, &phase) in seq.modes()[..n_upper].iter().zip(psi) {
        let factor = TrigPoly::one().add(&TrigPoly::cosine_shifted(n, phase).scale_dyadic(&half));
        acc = acc.multiply(&factor)?;
    }
    Ok(acc)
}

/// Convolving the shifted product against the plain Riesz product multiplies
/// matching Fourier coefficients, and distinct subset sums make that the same
/// as halving every cosine amplitude in place.
pub fn check_phase_convolution_identity(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let seq = LacunarySeq::make(3, Ratio::from_integer(3), 4, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    rng.set_stream(IDENTITY_STREAM);
    let mut out = Vec::new();
    for k in 1..=seq.len() {
        let mut draws = vec![(String::from("zero"), vec![0.0; k])];
        for which in 1..=2u32 {
            let psi: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
            draws.push((format!("draw{which}"), psi));
        }
        for (label, psi) in &draws {
            let conv = riesz_shifted(&seq, k, psi)?.convolve_fourier(&riesz_product(&seq, k)?);
            let tilde = tilde_product(&seq, k, psi)?;
            let dist = conv.sub(&tilde).coeff_energy().sqrt();
            out.push(CheckResult::with_slack(
                "phase-convolution-identity",
                &format!("k={k} psi={label} terms={}", tilde.frequencies().len()),
                dist,
                0.0,
                -dist,
                1e-12,
                "fourier",
                ctx.seed,
            ));
        }
    }
    Ok(out)
}

struct ContractionCase {
    label: &'static str,
    weights: Vec<Vec<f64>>,
    e_norm: ENorm,
}

fn contraction_cases() -> Vec<ContractionCase> {
    vec![
        ContractionCase {
            label: "scalar-alternating N=5",
            weights: vec![
                vec![1.0],
                vec![-1.0],
                vec![1.0],
                vec![-1.0],
                vec![1.0],
                vec![-1.0],
            ],
            e_norm: ENorm::L2,
        },
        ContractionCase {
            label: "scalar-decaying N=4",
            weights: vec![
                vec![1.0],
                vec![-0.5],
                vec![0.25],
                vec![-0.125],
                vec![0.0625],
            ],
            e_norm: ENorm::L2,
        },
        ContractionCase {
            label: "planar-rotated N=3 l2",
            weights: vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ],
            e_norm: ENorm::L2,
        },
        ContractionCase {
            label: "planar-mixed N=2 l1",
            weights: vec![vec![1.0, 0.5], vec![-0.5, 1.0], vec![0.25, -0.25]],
            e_norm: ENorm::L1,
        },
        ContractionCase {
            label: "single-top N=3",
            weights: vec![vec![0.0], vec![0.0], vec![0.0], vec![1.0]],
            e_norm: ENorm::L2,
        },
        ContractionCase {
            label: "constant-only N=0",
            weights: vec![vec![0.7, -0.3]],
            e_norm: ENorm::L2,
        },
    ]
}

fn l1_mean(
    seq: &LacunarySeq,
    weights: &[Vec<f64>],
    e_norm: ENorm,
    psi: &[f64],
    amplitude: f64,
    ctx: &CheckCtx,
) -> Result<(f64, f64)> {
    let ev = RieszSumEvaluator::with_phases(seq, weights, psi, amplitude)?;
    let grid = NormPowerGridFn::new(&ev, e_norm, 1.0, None);
    let rep = mean_quadrature(&grid, ctx.tol, ctx.max_points)?;
    Ok((rep.value, rep.error_estimate))
}

/// Replacing every partial product by its halved, phase-shifted twin can only
/// shrink the mean norm of the weighted sum, at every sampled phase vector and
/// on average over the sample.
pub fn check_phase_average_contraction(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    check_phase_average_contraction_sampled(ctx, 10)
}

/// Same battery with an explicit number of random phase vectors per instance.
pub fn check_phase_average_contraction_sampled(
    ctx: &CheckCtx,
    psi_samples: u32,
) -> Result<Vec<CheckResult>> {
    let seq = LacunarySeq::make(3, Ratio::from_integer(3), 5, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    rng.set_stream(CONTRACTION_STREAM);
    let mut out = Vec::new();
    for case in contraction_cases() {
        let n_upper = case.weights.len() - 1;
        let zero = vec![0.0; n_upper];
        let (rhs, rhs_err) = l1_mean(&seq, &case.weights, case.e_norm, &zero, 1.0, ctx)?;
        let mut draws = vec![(String::from("zero"), zero.clone())];
        for which in 1..=psi_samples {
            let psi: Vec<f64> = (0..n_upper).map(|_| rng.gen_range(0.0..TAU)).collect();
            draws.push((format!("draw{which}"), psi));
        }
        let mut lhs_sum = 0.0;
        let mut lhs_err_sum = 0.0;
        for (label, psi) in &draws {
            let (lhs, lhs_err) = l1_mean(&seq, &case.weights, case.e_norm, psi, 0.5, ctx)?;
            lhs_sum += lhs;
            lhs_err_sum += lhs_err;
            out.push(CheckResult::with_slack(
                "phase-average-contraction",
                &format!("{} psi={label}", case.label),
                lhs,
                rhs,
                rhs - lhs,
                quad_slack(lhs_err + rhs_err),
                "quadrature",
                ctx.seed,
            ));
        }
        let count = draws.len() as f64;
        let mean_lhs = lhs_sum / count;
        out.push(CheckResult::with_slack(
            "phase-average-contraction",
            &format!("{} psi-mean over {}", case.label, draws.len()),
            mean_lhs,
            rhs,
            rhs - mean_lhs,
            quad_slack(lhs_err_sum / count + rhs_err),
            "quadrature",
            ctx.seed,
        ));
    }
    Ok(out)
}
