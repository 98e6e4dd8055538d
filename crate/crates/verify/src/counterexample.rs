//! The dissociation failure at ratio p: with modes in geometric progression
//! of ratio p, the L^p norms of the products drift away from their
//! independent-phase counterparts, so the moment equivalence cannot be
//! transferred from the independent case. Everything here is exact
//! coefficient arithmetic.

use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use riesz_core::error::{Error, Result};
use riesz_core::lacunary::LacunarySeq;
use riesz_core::moments::{
    exact_power_mean, rational_to_f64, riesz_moment_rational, x_moment, x_moment_rational,
};
use riesz_core::trigpoly::TrigPoly;

use crate::check::CheckResult;
use crate::lemmas::{hint_for, mean_closure, CheckCtx};

/// (1 + cos t)^q (1 + cos pt)^q, the paired factor of the construction.
fn paired_factor(q: u32, p: i64, budget: u64) -> Result<TrigPoly> {
    let a = TrigPoly::one().add(&TrigPoly::cosine(1)).pow(q, budget)?;
    let b = a.scale_frequency(p)?;
    a.multiply_budget(&b, budget)
}

/// Exact p-th moments of the product and its independent twin at tail
/// length 2k.
struct PairedMoments {
    product: BigRational,
    independent: BigRational,
}

fn paired_moments(
    seq: &LacunarySeq,
    p_even: u32,
    k: usize,
    budget: u64,
) -> Result<PairedMoments> {
    let product = riesz_moment_rational(seq, 2 * k, p_even, budget)?;
    let single = x_moment_rational(u64::from(p_even));
    let mut independent = BigRational::one();
    for _ in 0..2 * k {
        independent *= &single;
    }
    Ok(PairedMoments {
        product,
        independent,
    })
}

/// Modes 1, p, p^2, ... : each adjacent ratio is exactly p, the smallest
/// ratio at which order-p collisions appear.
fn power_modes(p_even: u32, length: usize) -> Result<LacunarySeq> {
    LacunarySeq::make(1, Ratio::from_integer(i64::from(p_even)), length, None)
}

/// At ratio p with p even, the ratio of the product L^p norm to the
/// independent one grows strictly in the number of mode pairs, the product
/// moment dominates the paired-factor power (∫f²)^k, and the drift traces
/// to an exact frequency collision q = q + p·0 = -q + p·1.
pub fn check_schneider_counterexample(
    p_even: u32,
    k_max: usize,
    ctx: &CheckCtx,
) -> Result<Vec<CheckResult>> {
    if p_even < 4 || !p_even.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "the construction needs an even exponent >= 4, got {p_even}"
        )));
    }
    if k_max < 2 {
        return Err(Error::InvalidArgument(
            "need at least two pair counts to compare growth".into(),
        ));
    }
    let q = p_even / 2;
    let p_mode = i64::from(p_even);
    let seq = power_modes(p_even, 2 * k_max)?;
    let f = paired_factor(q, p_mode, ctx.budget)?;
    let f_sq = exact_power_mean(&f, 2, ctx.budget)?;
    let mut out = Vec::new();
    let mut ratios: Vec<(BigRational, f64)> = Vec::new();
    for k in 1..=k_max {
        let m = paired_moments(&seq, p_even, k, ctx.budget)?;
        // Floor: the product moment dominates the k-th power of the
        // paired-factor second moment.
        let mut floor = BigRational::one();
        for _ in 0..k {
            floor *= &f_sq;
        }
        out.push(CheckResult::exact(
            "paired-power-floor",
            &format!("p={p_even} k={k} modes=p^0..p^{}", 2 * k - 1),
            rational_to_f64(&m.product),
            rational_to_f64(&floor),
            rational_to_f64(&(&m.product - &floor)),
            m.product >= floor,
        ));
        let ratio_pow = &m.product / &m.independent;
        let ratio = rational_to_f64(&ratio_pow).powf(1.0 / f64::from(p_even));
        ratios.push((ratio_pow, ratio));
    }
    for k in 1..k_max {
        let (prev_pow, prev) = &ratios[k - 1];
        let (next_pow, next) = &ratios[k];
        out.push(CheckResult::exact(
            "paired-power-growth",
            &format!("p={p_even} r_{k}<r_{}", k + 1),
            *prev,
            *next,
            next - prev,
            next_pow > prev_pow,
        ));
    }
    // The independent moment at one pair is the separable double integral
    // of g(x, y) = (1 + cos x)^q (1 + cos y)^q.
    let g_sq = {
        let single = x_moment_rational(u64::from(p_even));
        &single * &single
    };
    out.push(CheckResult::exact(
        "collision-strictness",
        &format!("p={p_even} paired-second-moment-strict"),
        rational_to_f64(&f_sq),
        rational_to_f64(&g_sq),
        rational_to_f64(&(&f_sq - &g_sq)),
        f_sq > g_sq,
    ));
    // The witness: frequency q of f receives two writings m1 + p m2,
    // namely (q, 0) and (-q, 1), each with positive weight.
    let a = TrigPoly::one().add(&TrigPoly::cosine(1)).pow(q, ctx.budget)?;
    let coeff = |n: i64| -> BigRational {
        a.coeff_exact(n)
            .map(|c| c.re.to_rational())
            .unwrap_or_else(BigRational::zero)
    };
    let direct = coeff(i64::from(q)) * coeff(0);
    let folded = coeff(-i64::from(q)) * coeff(1);
    let total = f
        .coeff_exact(i64::from(q))
        .map(|c| c.re.to_rational())
        .unwrap_or_else(BigRational::zero);
    let sum = &direct + &folded;
    out.push(CheckResult::exact(
        "collision-strictness",
        &format!("p={p_even} witness-frequency q={q} two-writings"),
        rational_to_f64(&total),
        rational_to_f64(&sum),
        rational_to_f64(&folded),
        total == sum && folded > BigRational::zero(),
    ));
    Ok(out)
}

/// L^p norms of P(x) = (1 + cos x)(1 + cos qx) against its two-variable
/// twin: equal at every integer p below q, strictly apart at p = q and
/// beyond, and measurably apart at the tested fractional exponents.
pub fn check_p_discrepancy(q_even: u32, ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    if q_even < 4 || !q_even.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "the pair construction needs an even q >= 4, got {q_even}"
        )));
    }
    let p_poly = TrigPoly::one()
        .add(&TrigPoly::cosine(1))
        .multiply(&TrigPoly::one().add(&TrigPoly::cosine(i64::from(q_even))))?;
    let mut out = Vec::new();
    for p in 1..=q_even + 1 {
        let lhs = exact_power_mean(&p_poly, p, ctx.budget)?;
        let single = x_moment_rational(u64::from(p));
        let rhs = &single * &single;
        let diff = &lhs - &rhs;
        let strict = p >= q_even;
        let pass = if strict { diff > BigRational::zero() } else { diff.is_zero() };
        out.push(CheckResult::exact(
            "degree-pair-discrepancy",
            &format!(
                "q={q_even} p={p} {}",
                if strict { "strictly-larger" } else { "equal" }
            ),
            rational_to_f64(&lhs),
            rational_to_f64(&rhs),
            rational_to_f64(&diff),
            pass,
        ));
    }
    // Fractional exponents between the last equality and the collision
    // order: the gap is visible beyond quadrature error.
    for p in [f64::from(q_even) - 0.5, f64::from(q_even) + 0.5] {
        let poly = p_poly.clone();
        let lhs = mean_closure(ctx, hint_for(2 * i64::from(q_even) + 2), move |t| {
            poly.evaluate_real(t).max(0.0).powf(p)
        })?;
        let single = x_moment(p)?;
        let rhs = single.value * single.value;
        let err = lhs.error_estimate + 2.0 * single.value * single.error_estimate;
        let gap = (lhs.value - rhs).abs();
        out.push(CheckResult::with_slack(
            "degree-pair-discrepancy",
            &format!("q={q_even} p={p} gap-visible"),
            gap,
            10.0 * err,
            gap - 10.0 * err,
            0.0,
            "quadrature",
            ctx.seed,
        ));
    }
    Ok(out)
}
