//! Instance batteries for the auxiliary inequalities behind the moment
//! bounds. Each check computes the two sides of one statement by
//! independent routes: exact coefficient arithmetic whenever the data is
//! polynomial with dyadic coefficients, adaptive grid quadrature or grid
//! suprema otherwise.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::One;
use riesz_core::dyadic::{ComplexDyadic, Dyadic};
use riesz_core::error::Result;
use riesz_core::lacunary::LacunarySeq;
use riesz_core::moments::{
    binomial, exact_power_mean, exact_weighted_power_mean, lp_even_exact,
    partial_moment_rational, phi_moment_rational, rational_to_f64, x_moment,
    x_moment_rational,
};
use riesz_core::quadrature::{adaptive_mean, ClosureGridFn, MeanEstimate, DEFAULT_MAX_POINTS};
use riesz_core::riesz::{partial_product, phi_k, riesz_product};
use riesz_core::trigpoly::{ENorm, TrigPoly, VecTrigPoly, DEFAULT_PAIR_BUDGET};

use crate::check::{quad_slack, CheckResult};

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Numeric policy shared by all checks: quadrature tolerance, grid point
/// budget, pairwise multiplication budget, and the seed echoed in results.
#[derive(Debug, Clone, Copy)]
pub struct CheckCtx {
    pub tol: f64,
    pub max_points: u64,
    pub budget: u64,
    pub seed: u64,
}

impl Default for CheckCtx {
    fn default() -> Self {
        CheckCtx {
            tol: 1e-9,
            max_points: DEFAULT_MAX_POINTS,
            budget: DEFAULT_PAIR_BUDGET,
            seed: 0,
        }
    }
}

/// Adaptive mean of a closure over the torus.
pub(crate) fn mean_closure<F: Fn(f64) -> f64 + Sync>(
    ctx: &CheckCtx,
    hint: u64,
    f: F,
) -> Result<MeanEstimate> {
    adaptive_mean(&ClosureGridFn::new(f, hint), ctx.tol, ctx.max_points)
}

/// Starting grid that resolves a trigonometric degree with headroom.
pub(crate) fn hint_for(deg: i64) -> u64 {
    (4 * deg.unsigned_abs().max(16)).next_power_of_two()
}

/// Exact mean of a dyadic-coefficient polynomial.
pub(crate) fn exact_mean(poly: &TrigPoly) -> Result<BigRational> {
    exact_power_mean(poly, 1, DEFAULT_PAIR_BUDGET)
}

/// Cosine polynomial from (frequency, numerator, log2 denominator) triples;
/// frequency zero contributes a constant.
pub(crate) fn cospoly(terms: &[(i64, i64, u32)]) -> TrigPoly {
    let mut acc = TrigPoly::zero();
    for &(freq, num, exp) in terms {
        let c = Dyadic::ratio(num, exp);
        let t = if freq == 0 {
            TrigPoly::constant_dyadic(c)
        } else {
            TrigPoly::cosine(freq).scale_dyadic(&c)
        };
        acc = acc.add(&t);
    }
    acc
}

/// 1/2^p as a rational.
fn half_pow(p: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2u32).pow(p))
}

/// Grid argmax of a scalar function over the torus.
fn grid_argmax(f: &(impl Fn(f64) -> f64 + ?Sized), grid: usize) -> (f64, f64) {
    let mut best_t = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..grid {
        let t = TAU * i as f64 / grid as f64;
        let v = f(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    (best_t, best)
}

/// Ternary refinement of a local maximum; never returns less than f(t0).
fn refine_arg_max(f: &(impl Fn(f64) -> f64 + ?Sized), t0: f64, radius: f64) -> (f64, f64) {
    let mut lo = t0 - radius;
    let mut hi = t0 + radius;
    for _ in 0..100 {
        let third = (hi - lo) / 3.0;
        if f(lo + third) < f(hi - third) {
            lo += third;
        } else {
            hi -= third;
        }
    }
    let mid = 0.5 * (lo + hi);
    if f(mid) >= f(t0) {
        (mid, f(mid))
    } else {
        (t0, f(t0))
    }
}

/// Grid supremum sharpened by local ternary search around the best node.
pub(crate) fn sup_refined(f: &(impl Fn(f64) -> f64 + ?Sized), grid: usize) -> f64 {
    let (t0, v0) = grid_argmax(f, grid);
    refine_arg_max(f, t0, TAU / grid as f64).1.max(v0)
}

/// 2-d grid supremum sharpened by coordinate ascent from the best node.
fn sup2_refined(f: &(impl Fn(f64, f64) -> f64 + ?Sized), gx: usize, gy: usize) -> f64 {
    let (mut bx, mut by, mut best) = grid2_argmax(f, gx, gy);
    let mut rx = TAU / gx as f64;
    let mut ry = TAU / gy as f64;
    for _ in 0..10 {
        let (nx, _) = refine_arg_max(&|x| f(x, by), bx, rx);
        bx = nx;
        let (ny, v) = refine_arg_max(&|y| f(bx, y), by, ry);
        by = ny;
        best = best.max(v);
        rx *= 0.5;
        ry *= 0.5;
    }
    best
}

fn grid2_argmax(
    f: &(impl Fn(f64, f64) -> f64 + ?Sized),
    gx: usize,
    gy: usize,
) -> (f64, f64, f64) {
    let mut bx = 0.0;
    let mut by = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..gx {
        let x = TAU * i as f64 / gx as f64;
        for j in 0..gy {
            let y = TAU * j as f64 / gy as f64;
            let v = f(x, y);
            if v > best {
                best = v;
                bx = x;
                by = y;
            }
        }
    }
    (bx, by, best)
}

/// If the cross term of g against f is gamma-small relative to the p-th
/// moment of f, the sum f+g keeps a definite share of both moments:
/// mean ||f+g||^p >= (3^-p - 2 p gamma) mean ||f||^p + mean ||g||^p.
pub fn check_split_sum_lower_bound(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let x1 = TrigPoly::one().add(&TrigPoly::cosine(1));
    let scalar_f = VecTrigPoly::scalar(x1.clone())?;
    let scalar_g_small =
        VecTrigPoly::scalar(TrigPoly::cosine(9).scale_dyadic(&Dyadic::ratio(1, 2)))?;
    let scalar_g_big = VecTrigPoly::scalar(TrigPoly::cosine(9))?;
    let vec_f = VecTrigPoly::new(vec![x1.clone(), TrigPoly::cosine(2)], ENorm::L2)?;
    let vec_g = VecTrigPoly::new(
        vec![
            TrigPoly::cosine(27).scale_dyadic(&Dyadic::ratio(1, 2)),
            TrigPoly::cosine(27).scale_dyadic(&Dyadic::ratio(1, 3)),
        ],
        ENorm::L2,
    )?;
    let pairs: [(&VecTrigPoly, &VecTrigPoly, &str); 3] = [
        (&scalar_f, &scalar_g_small, "scalar-small-tail"),
        (&scalar_f, &scalar_g_big, "scalar-unit-tail"),
        (&vec_f, &vec_g, "planar-l2"),
    ];
    let mut out = Vec::new();
    for &p in &[1.5f64, 2.0, 3.0] {
        for (f, g, label) in &pairs {
            let sum = f.add(g)?;
            let hint = hint_for(f.degree().max(g.degree()));
            let m_f = mean_closure(ctx, hint, |t| f.norm_at(t).powf(p))?;
            let m_g = mean_closure(ctx, hint, |t| g.norm_at(t).powf(p))?;
            let m_cross =
                mean_closure(ctx, hint, |t| g.norm_at(t).powf(p - 1.0) * f.norm_at(t))?;
            let m_sum = mean_closure(ctx, hint, |t| sum.norm_at(t).powf(p))?;
            let gamma = m_cross.value / m_f.value;
            let coef = 3f64.powf(-p) - 2.0 * p * gamma;
            let lhs = m_sum.value;
            let rhs = coef * m_f.value + m_g.value;
            let err = m_sum.error_estimate
                + m_g.error_estimate
                + m_f.error_estimate * (coef.abs() + 2.0 * p * gamma)
                + 2.0 * p * m_cross.error_estimate;
            out.push(CheckResult::with_slack(
                "split-sum-lower-bound",
                &format!("p={p} {label} gamma={gamma:.3e}"),
                lhs,
                rhs,
                lhs - rhs,
                quad_slack(err),
                "quadrature",
                ctx.seed,
            ));
        }
    }
    Ok(out)
}

/// mean cos^2p sin^2kp is at most 1/(kp+1) times the product of the two
/// separate moments; equality at k = p = 1 where both sides are 1/8. The
/// integer instances are exact via the Beta identity
/// mean cos^2p sin^2kp * C(p+kp, p) = mean cos^2p * mean sin^2kp.
pub fn check_cos_sin_moment_product(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let x = TrigPoly::one().add(&TrigPoly::cosine(1));
    for &(k, p) in &[(1u32, 1u32), (2, 1), (1, 2), (2, 2), (3, 2), (2, 3)] {
        let kp = k * p;
        let phi = phi_k(kp)?;
        let lhs = exact_weighted_power_mean(&x, p, &phi, ctx.budget)? * half_pow(p);
        let rhs = phi_moment_rational(u64::from(p)) * phi_moment_rational(u64::from(kp))
            / BigRational::from_integer(BigInt::from(kp + 1));
        let margin = rational_to_f64(&(rhs.clone() - lhs.clone()));
        out.push(CheckResult::exact(
            "cos-sin-moment-product",
            &format!("k={k} p={p}"),
            rational_to_f64(&lhs),
            rational_to_f64(&rhs),
            margin,
            lhs <= rhs,
        ));
        let ident_lhs = lhs.clone() * BigRational::from_integer(binomial(u64::from(p + kp), u64::from(p)));
        let ident_rhs = phi_moment_rational(u64::from(p)) * phi_moment_rational(u64::from(kp));
        let diff = rational_to_f64(&(ident_rhs.clone() - ident_lhs.clone()));
        out.push(CheckResult::exact(
            "cos-sin-moment-product",
            &format!("k={k} p={p} beta-identity"),
            rational_to_f64(&ident_lhs),
            rational_to_f64(&ident_rhs),
            -diff.abs(),
            ident_lhs == ident_rhs,
        ));
        if k == 1 && p == 1 {
            let eighth = BigRational::new(BigInt::one(), BigInt::from(8));
            out.push(CheckResult::exact(
                "cos-sin-moment-product",
                "k=1 p=1 equality-at-1/8",
                rational_to_f64(&lhs),
                0.125,
                0.0,
                lhs == eighth && rhs == eighth,
            ));
        }
    }
    for &(k, p) in &[(2u32, 1.5f64), (1, 2.5)] {
        let kp = k as f64 * p;
        let hint = 1024;
        let m_both = mean_closure(ctx, hint, |t| {
            t.cos().abs().powf(2.0 * p) * t.sin().abs().powf(2.0 * kp)
        })?;
        let m_cos = mean_closure(ctx, hint, |t| t.cos().abs().powf(2.0 * p))?;
        let m_sin = mean_closure(ctx, hint, |t| t.sin().abs().powf(2.0 * kp))?;
        let lhs = m_both.value;
        let rhs = m_cos.value * m_sin.value / (kp + 1.0);
        let err = m_both.error_estimate + m_cos.error_estimate + m_sin.error_estimate;
        out.push(CheckResult::with_slack(
            "cos-sin-moment-product",
            &format!("k={k} p={p}"),
            lhs,
            rhs,
            rhs - lhs,
            quad_slack(err),
            "quadrature",
            ctx.seed,
        ));
    }
    Ok(out)
}

/// A slow factor barely correlates with a fast one: the covariance of f(t)
/// and g(nt) is at most (2 pi / n) mean|f'| mean|g|. The covariance side is
/// exact coefficient arithmetic; the gradient side is quadrature.
pub fn check_oscillation_decorrelation(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let x = TrigPoly::one().add(&TrigPoly::cosine(1));
    let f1 = x.multiply(&x)?;
    let g1 = cospoly(&[(0, 1, 0), (1, 1, 0), (2, 1, 1)]);
    let f2 = TrigPoly::one().add(&TrigPoly::cosine(3));
    let cases: [(&TrigPoly, &TrigPoly, i64, &str); 5] = [
        (&f1, &g1, 8, "sq-factor n=8"),
        (&f1, &g1, 64, "sq-factor n=64"),
        (&f1, &g1, 256, "sq-factor n=256"),
        (&f2, &f1, 16, "deg3-vs-sq n=16"),
        (&f2, &f1, 128, "deg3-vs-sq n=128"),
    ];
    let mut out = Vec::new();
    for (f, g, n, label) in cases {
        let prod = f.multiply(&g.scale_frequency(n)?)?;
        let cov = exact_mean(&prod)? - exact_mean(f)? * exact_mean(g)?;
        let lhs = rational_to_f64(&cov).abs();
        let fp = f.derivative();
        let m_fp = mean_closure(ctx, hint_for(f.degree()), |t| fp.evaluate_real(t).abs())?;
        let m_g = mean_closure(ctx, hint_for(g.degree()), |t| g.evaluate_real(t).abs())?;
        let rhs = TAU / n as f64 * m_fp.value * m_g.value;
        let err = TAU / n as f64 * (m_fp.error_estimate * m_g.value + m_g.error_estimate * m_fp.value);
        out.push(CheckResult::with_slack(
            "oscillation-decorrelation",
            label,
            lhs,
            rhs,
            rhs - lhs,
            quad_slack(err),
            "exact+quadrature",
            ctx.seed,
        ));
    }
    Ok(out)
}

/// Bounded-degree factors on a sequence with ratio at least deg+1 integrate
/// to the product of their means, bit-exactly; the top factor is free.
pub fn check_exact_factorization(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let _ = ctx;
    let mut out = Vec::new();
    {
        let seq = LacunarySeq::make(3, Ratio::from_integer(3), 4, None)?;
        let gs = [
            cospoly(&[(0, 1, 0), (1, 3, 2), (2, 1, 2)]),
            cospoly(&[(0, 1, 0), (1, -1, 1), (2, 1, 3)]),
            cospoly(&[(0, 1, 2), (2, 1, 0)]),
            cospoly(&[(0, 1, 0), (1, 1, 0), (5, 1, 1)]),
        ];
        out.push(factorization_instance(&seq, &gs, "deg2-ratio3")?);
    }
    {
        let seq = LacunarySeq::make(2, Ratio::from_integer(4), 4, None)?;
        let gs = [
            cospoly(&[(0, 1, 0), (3, 1, 1)]),
            cospoly(&[(0, 1, 1), (1, 1, 0), (2, -1, 2), (3, 1, 3)]),
            cospoly(&[(0, 1, 0), (2, 5, 3)]),
            cospoly(&[(0, 1, 0), (7, 1, 0)]),
        ];
        out.push(factorization_instance(&seq, &gs, "deg3-ratio4")?);
    }
    Ok(out)
}

fn factorization_instance(
    seq: &LacunarySeq,
    gs: &[TrigPoly],
    label: &str,
) -> Result<CheckResult> {
    let mut prod = TrigPoly::one();
    let mut rhs = BigRational::one();
    for (j, g) in gs.iter().enumerate() {
        prod = prod.multiply(&g.scale_frequency(seq.modes()[j])?)?;
        rhs *= exact_mean(g)?;
    }
    let lhs = exact_mean(&prod)?;
    let diff = rational_to_f64(&(rhs.clone() - lhs.clone()));
    Ok(CheckResult::exact(
        "exact-factorization",
        label,
        rational_to_f64(&lhs),
        rational_to_f64(&rhs),
        -diff.abs(),
        lhs == rhs,
    ))
}

/// Bernstein in L^p: mean ||f'||^p <= d^p mean ||f||^p for degree-d f, with
/// equality at f = cos(dt).
pub fn check_derivative_norm_bound(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for &d in &[1i64, 3] {
        for &p in &[1.5f64, 3.0] {
            let f = TrigPoly::cosine(d);
            let fp = f.derivative();
            let hint = hint_for(d);
            let m_f = mean_closure(ctx, hint, |t| f.evaluate_real(t).abs().powf(p))?;
            let m_fp = mean_closure(ctx, hint, |t| fp.evaluate_real(t).abs().powf(p))?;
            let lhs = m_fp.value;
            let rhs = (d as f64).powf(p) * m_f.value;
            let err = m_fp.error_estimate + (d as f64).powf(p) * m_f.error_estimate;
            out.push(CheckResult::with_slack(
                "derivative-norm-bound",
                &format!("cos({d}t) p={p}"),
                lhs,
                rhs,
                rhs - lhs,
                quad_slack(err),
                "quadrature",
                ctx.seed,
            ));
            out.push(CheckResult::with_slack(
                "derivative-norm-bound",
                &format!("cos({d}t) p={p} equality"),
                lhs,
                rhs,
                -(rhs - lhs).abs(),
                quad_slack(err),
                "quadrature",
                ctx.seed,
            ));
        }
    }
    {
        let f = cospoly(&[(0, 1, 0), (1, 1, 0), (2, 1, 1)]);
        let fp = f.derivative();
        let p = 1.5f64;
        let d = 2f64;
        let hint = hint_for(2);
        let m_f = mean_closure(ctx, hint, |t| f.evaluate_real(t).abs().powf(p))?;
        let m_fp = mean_closure(ctx, hint, |t| fp.evaluate_real(t).abs().powf(p))?;
        let rhs = d.powf(p) * m_f.value;
        let err = m_fp.error_estimate + d.powf(p) * m_f.error_estimate;
        out.push(CheckResult::with_slack(
            "derivative-norm-bound",
            "generic-deg2 p=1.5",
            m_fp.value,
            rhs,
            rhs - m_fp.value,
            quad_slack(err),
            "quadrature",
            ctx.seed,
        ));
    }
    {
        let f = VecTrigPoly::new(
            vec![
                TrigPoly::one().add(&TrigPoly::cosine(1)),
                TrigPoly::cosine(3),
            ],
            ENorm::L2,
        )?;
        let fd = VecTrigPoly::new(
            f.coords().iter().map(TrigPoly::derivative).collect(),
            ENorm::L2,
        )?;
        let lhs = lp_even_exact(&fd, 2, ctx.budget)?;
        let rhs = lp_even_exact(&f, 2, ctx.budget)? * BigRational::from_integer(BigInt::from(9));
        let margin = rational_to_f64(&(rhs.clone() - lhs.clone()));
        out.push(CheckResult::exact(
            "derivative-norm-bound",
            "planar-l2 d=3 p=2",
            rational_to_f64(&lhs),
            rational_to_f64(&rhs),
            margin,
            lhs <= rhs,
        ));
    }
    Ok(out)
}

/// Correlation of a norm power against a fast oscillation: the covariance
/// of ||f||^p and h(nt) is at most 2 pi (p d / n) mean ||f||^p mean |h|.
pub fn check_power_weight_decorrelation(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let vec_f = VecTrigPoly::new(
        vec![
            TrigPoly::one().add(&TrigPoly::cosine(1)),
            TrigPoly::cosine(2),
        ],
        ENorm::L2,
    )?;
    let x = TrigPoly::one().add(&TrigPoly::cosine(1));
    let cube = VecTrigPoly::scalar(x.pow(3, DEFAULT_PAIR_BUDGET)?)?;
    let h1 = cospoly(&[(0, 1, 0), (1, 1, 0)]);
    let h2 = cospoly(&[(0, 1, 0), (1, -1, 1)]);
    let cases: [(&VecTrigPoly, &TrigPoly, f64, i64, &str); 5] = [
        (&vec_f, &h1, 1.5, 32, "planar p=1.5 n=32"),
        (&vec_f, &h1, 1.5, 128, "planar p=1.5 n=128"),
        (&vec_f, &h1, 2.0, 32, "planar p=2 n=32"),
        (&cube, &h2, 3.0, 64, "cube p=3 n=64"),
        (&cube, &h2, 3.0, 256, "cube p=3 n=256"),
    ];
    let mut out = Vec::new();
    for (f, h, p, n, label) in cases {
        let d = f.degree();
        let hint = hint_for(n + 4 * d);
        let m_joint = mean_closure(ctx, hint, |t| {
            f.norm_at(t).powf(p) * h.evaluate_real(n as f64 * t)
        })?;
        let m_fp = mean_closure(ctx, hint_for(4 * d), |t| f.norm_at(t).powf(p))?;
        let mh = rational_to_f64(&exact_mean(h)?);
        let m_habs = mean_closure(ctx, hint_for(h.degree()), |t| h.evaluate_real(t).abs())?;
        let lhs = (m_joint.value - m_fp.value * mh).abs();
        let rhs = TAU * p * d as f64 / n as f64 * m_fp.value * m_habs.value;
        let err = m_joint.error_estimate
            + m_fp.error_estimate * (mh.abs() + TAU * p * d as f64 / n as f64 * m_habs.value)
            + TAU * p * d as f64 / n as f64 * m_fp.value * m_habs.error_estimate;
        out.push(CheckResult::with_slack(
            "power-weight-decorrelation",
            label,
            lhs,
            rhs,
            rhs - lhs,
            quad_slack(err),
            "quadrature",
            ctx.seed,
        ));
    }
    Ok(out)
}

/// Modulating the second block by a fast cosine preserves a 3^-p share of
/// its moment: mean ||f1 + f2 cos(nt)||^p >= 3^-p mean ||f2||^p when both
/// blocks have degree at most d and n >= 3d.
pub fn check_modulated_tail_extraction(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let s1 = VecTrigPoly::scalar(cospoly(&[(0, 1, 0), (1, 1, 0), (2, 1, 0)]))?;
    let s2 = VecTrigPoly::scalar(cospoly(&[(0, 1, 0), (2, -1, 1)]))?;
    let v1 = VecTrigPoly::new(
        vec![
            TrigPoly::one().add(&TrigPoly::cosine(1)),
            TrigPoly::cosine(1),
        ],
        ENorm::L2,
    )?;
    let v2 = VecTrigPoly::new(vec![TrigPoly::cosine(2), TrigPoly::one()], ENorm::L2)?;
    let mut cases: Vec<(VecTrigPoly, VecTrigPoly, i64, f64, &str)> = vec![
        (s1.clone(), s2.clone(), 6, 1.0, "scalar n=6 p=1"),
        (s1.clone(), s2.clone(), 6, 1.5, "scalar n=6 p=1.5"),
        (s1.clone(), s2.clone(), 6, 2.0, "scalar n=6 p=2"),
        (s1.clone(), s2.clone(), 12, 1.5, "scalar n=12 p=1.5"),
        (v1.clone(), v2.clone(), 6, 1.0, "planar-l2 n=6 p=1"),
        (v1.clone(), v2.clone(), 6, 2.0, "planar-l2 n=6 p=2"),
    ];
    for (e_norm, label) in [(ENorm::L1, "planar-l1 n=6 p=2"), (ENorm::Linf, "planar-linf n=6 p=2")] {
        let a = VecTrigPoly::new(v1.coords().to_vec(), e_norm)?;
        let b = VecTrigPoly::new(v2.coords().to_vec(), e_norm)?;
        cases.push((a, b, 6, 2.0, label));
    }
    let mut out = Vec::new();
    for (f1, f2, n, p, label) in cases {
        let cosn = TrigPoly::cosine(n);
        let coords: Result<Vec<TrigPoly>> = f1
            .coords()
            .iter()
            .zip(f2.coords())
            .map(|(a, b)| Ok(a.add(&b.multiply(&cosn)?)))
            .collect();
        let comb = VecTrigPoly::new(coords?, f1.e_norm())?;
        let hint = hint_for(comb.degree());
        let m_comb = mean_closure(ctx, hint, |t| comb.norm_at(t).powf(p))?;
        let m_f2 = mean_closure(ctx, hint_for(f2.degree()), |t| f2.norm_at(t).powf(p))?;
        let rhs = 3f64.powf(-p) * m_f2.value;
        let err = m_comb.error_estimate + 3f64.powf(-p) * m_f2.error_estimate;
        out.push(CheckResult::with_slack(
            "modulated-tail-extraction",
            label,
            m_comb.value,
            rhs,
            m_comb.value - rhs,
            quad_slack(err),
            "quadrature",
            ctx.seed,
        ));
    }
    Ok(out)
}

/// Collapsing a fast carrier onto the slow variable loses at most a factor
/// 1 - pi^2 d^2 / (2 M^2) of the two-variable supremum:
/// sup_x |P1 + P2 e^{iMx} + P3 e^{-iMx}| against
/// sup_{x,phi} |P1 + P2 e^{i phi} + P3 e^{-i phi}|.
pub fn check_two_scale_sup_transfer(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let x1 = TrigPoly::one().add(&TrigPoly::cosine(1));
    let quarter_x1 = x1.scale_dyadic(&Dyadic::ratio(1, 2));
    let e_plus = TrigPoly::from_exact_terms(vec![(1, ComplexDyadic::real(Dyadic::ratio(1, 2)))]);
    let p2_complex = e_plus.add(&TrigPoly::constant_dyadic(Dyadic::ratio(1, 3)));
    let p3_complex = TrigPoly::constant_dyadic(Dyadic::ratio(1, 4));
    let p1_deg2 = TrigPoly::one().add(&TrigPoly::cosine(2));
    let p2_deg2 = cospoly(&[(1, 1, 1), (2, 1, 2)]);
    let p3_deg2 = cospoly(&[(0, 1, 3), (2, -1, 3)]);
    let cases: [(&TrigPoly, &TrigPoly, &TrigPoly, i64, i64, &str); 4] = [
        (&x1, &quarter_x1, &quarter_x1, 1, 8, "real d=1 M=8"),
        (&x1, &quarter_x1, &quarter_x1, 1, 32, "real d=1 M=32"),
        (&x1, &p2_complex, &p3_complex, 1, 16, "complex d=1 M=16"),
        (&p1_deg2, &p2_deg2, &p3_deg2, 2, 16, "real d=2 M=16"),
    ];
    let mut out = Vec::new();
    for (p1, p2, p3, d, m, label) in cases {
        let carrier = TrigPoly::from_exact_terms(vec![(m, ComplexDyadic::real(Dyadic::one()))]);
        let carrier_conj =
            TrigPoly::from_exact_terms(vec![(-m, ComplexDyadic::real(Dyadic::one()))]);
        let pfull = p1
            .add(&p2.multiply(&carrier)?)
            .add(&p3.multiply(&carrier_conj)?);
        let lhs = sup_refined(&|x| pfull.evaluate(x).norm(), 16384);
        let q = |x: f64, phi: f64| {
            let e = Complex64::from_polar(1.0, phi);
            (p1.evaluate(x) + p2.evaluate(x) * e + p3.evaluate(x) * e.conj()).norm()
        };
        let (_, _, sup_q) = grid2_argmax(&q, 1024, 512);
        let factor = 1.0 - PI * PI * (d * d) as f64 / (2.0 * (m * m) as f64);
        let rhs = factor * sup_q;
        out.push(CheckResult::with_slack(
            "two-scale-sup-transfer",
            label,
            lhs,
            rhs,
            lhs - rhs,
            1e-9 * (1.0 + rhs.abs()),
            "grid-sup",
            ctx.seed,
        ));
    }
    Ok(out)
}

/// Iterating the two-scale transfer across a lacunary tail: the geometric
/// degree bound, the product-of-constants bound, and concrete decoupling
/// instances in two and three frequencies.
pub fn check_iterated_sup_transfer(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    // Degree of the collapsed lower block: sum n_j over j < N is at most
    // (3/2) n_{N-1} when the ratio is at least 3. Exact integers.
    let seq3 = LacunarySeq::make(3, Ratio::from_integer(3), 6, None)?;
    for n_upper in 2..=6usize {
        let d: i64 = seq3.prefix_sum(n_upper - 1);
        let cap2 = 3 * seq3.modes()[n_upper - 2];
        out.push(CheckResult::exact(
            "iterated-sup-transfer",
            &format!("degree-bound N={n_upper}"),
            d as f64,
            cap2 as f64 / 2.0,
            (cap2 - 2 * d) as f64 / 2.0,
            2 * d <= cap2,
        ));
    }
    // Product of the per-step constants dominates one minus the sum of the
    // per-step losses, for a sequence with growing ratios.
    let modes = [4i64, 16, 128, 2048, 65536];
    let mut prod = 1.0f64;
    let mut loss = 0.0f64;
    for w in modes.windows(2) {
        let r = w[0] as f64 / w[1] as f64;
        let a = 9.0 * PI * PI / 8.0 * r * r;
        prod *= 1.0 - a;
        loss += a;
    }
    out.push(CheckResult::with_slack(
        "iterated-sup-transfer",
        "constant-product-bound",
        prod,
        1.0 - loss,
        prod - (1.0 - loss),
        1e-12,
        "exact",
        ctx.seed,
    ));
    // Two-frequency decoupling on (4, 64).
    let (n1, n2) = (4i64, 64i64);
    for (signs, label) in [(false, "riesz-signs"), (true, "mixed-signs")] {
        let coeffs = lambda2_coeffs(signs);
        let p = poly_from_eps2(&coeffs, n1, n2);
        let pf = |x: f64| p.evaluate(x).norm();
        let sup_p = sup_refined(&pf, 16384);
        let q = |x: f64, phi: f64| {
            let e2 = Complex64::from_polar(1.0, phi);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(e1, e2i, num, exp) in &coeffs {
                let c = num as f64 / f64::from(1u32 << exp);
                let base = Complex64::from_polar(c, (e1 * n1) as f64 * x);
                acc += match e2i {
                    1 => base * e2,
                    -1 => base * e2.conj(),
                    _ => base,
                };
            }
            acc.norm()
        };
        let (_, _, sup_q_grid) = grid2_argmax(&q, 1024, 512);
        let c2 = 1.0 - 9.0 * PI * PI / 8.0 * (n1 as f64 / n2 as f64).powi(2);
        out.push(CheckResult::with_slack(
            "iterated-sup-transfer",
            &format!("decouple-lower N=2 {label}"),
            sup_p,
            c2 * sup_q_grid,
            sup_p - c2 * sup_q_grid,
            1e-9 * (1.0 + sup_q_grid),
            "grid-sup",
            ctx.seed,
        ));
        // Upper direction: the one-variable supremum never exceeds the
        // decoupled one; refine the decoupled side only.
        let sup_q_ref = sup2_refined(&q, 1024, 512);
        let (xstar, sup_p_grid) = grid_argmax(&pf, 16384);
        out.push(CheckResult::with_slack(
            "iterated-sup-transfer",
            &format!("decouple-upper N=2 {label}"),
            sup_q_ref,
            sup_p_grid,
            sup_q_ref - sup_p_grid,
            1e-9 * (1.0 + sup_p_grid),
            "grid-sup",
            ctx.seed,
        ));
        // The diagonal substitution reproduces the one-variable polynomial.
        let diag = q(xstar, (n2 as f64 * xstar).rem_euclid(TAU));
        out.push(CheckResult::with_slack(
            "iterated-sup-transfer",
            &format!("diagonal-identity {label}"),
            diag,
            pf(xstar),
            -(diag - pf(xstar)).abs(),
            1e-9 * (1.0 + diag),
            "grid-sup",
            ctx.seed,
        ));
    }
    // Three-frequency iterated decoupling on (4, 16, 64).
    {
        let seq = LacunarySeq::make(4, Ratio::from_integer(4), 3, None)?;
        let m = seq.modes();
        let r = riesz_product(&seq, 3)?;
        let alt = TrigPoly::one()
            .add(&TrigPoly::cosine(m[0]))
            .multiply(&TrigPoly::one().sub(&TrigPoly::cosine(m[1]).scale_dyadic(&Dyadic::ratio(1, 1))))?
            .multiply(&TrigPoly::one().add(&TrigPoly::cosine(m[2]).scale_dyadic(&Dyadic::ratio(1, 2))))?;
        for (p, label) in [(&r, "riesz-signs"), (&alt, "mixed-signs")] {
            let sup_p = sup_refined(&|x| p.evaluate(x).norm(), 8192);
            let groups = group_by_top(p, m[1], m[2]);
            let g = 96usize;
            let mut sup_q: f64 = 0.0;
            for i in 0..512usize {
                let x = TAU * i as f64 / 512.0;
                let mut b = [[Complex64::new(0.0, 0.0); 3]; 3];
                for (e2, e3, freq, c) in &groups {
                    b[(e2 + 1) as usize][(e3 + 1) as usize] +=
                        c * Complex64::from_polar(1.0, *freq as f64 * x);
                }
                for j in 0..g {
                    let u = Complex64::from_polar(1.0, TAU * j as f64 / g as f64);
                    for l in 0..g {
                        let v = Complex64::from_polar(1.0, TAU * l as f64 / g as f64);
                        let row = |e2: usize| b[e2][1] + b[e2][2] * v + b[e2][0] * v.conj();
                        let val = (row(1) + row(2) * u + row(0) * u.conj()).norm();
                        sup_q = sup_q.max(val);
                    }
                }
            }
            let c_step = |lo: i64, hi: i64| 1.0 - 9.0 * PI * PI / 8.0 * (lo as f64 / hi as f64).powi(2);
            let cprod = c_step(m[0], m[1]) * c_step(m[1], m[2]);
            out.push(CheckResult::with_slack(
                "iterated-sup-transfer",
                &format!("decouple-lower N=3 {label}"),
                sup_p,
                cprod * sup_q,
                sup_p - cprod * sup_q,
                1e-9 * (1.0 + sup_q),
                "grid-sup",
                ctx.seed,
            ));
        }
    }
    Ok(out)
}

/// Epsilon-indexed dyadic coefficients over two frequencies; mirror images
/// share a coefficient so the polynomial is real.
fn lambda2_coeffs(mixed: bool) -> Vec<(i64, i64, i64, u32)> {
    if mixed {
        vec![
            (0, 0, 1, 0),
            (1, 0, 1, 1),
            (-1, 0, 1, 1),
            (0, 1, -1, 1),
            (0, -1, -1, 1),
            (1, 1, 1, 2),
            (-1, -1, 1, 2),
            (1, -1, -1, 2),
            (-1, 1, -1, 2),
        ]
    } else {
        vec![
            (0, 0, 1, 0),
            (1, 0, 1, 1),
            (-1, 0, 1, 1),
            (0, 1, 1, 1),
            (0, -1, 1, 1),
            (1, 1, 1, 2),
            (-1, -1, 1, 2),
            (1, -1, 1, 2),
            (-1, 1, 1, 2),
        ]
    }
}

fn poly_from_eps2(coeffs: &[(i64, i64, i64, u32)], n1: i64, n2: i64) -> TrigPoly {
    let terms = coeffs
        .iter()
        .map(|&(e1, e2, num, exp)| {
            (
                e1 * n1 + e2 * n2,
                ComplexDyadic::real(Dyadic::ratio(num, exp)),
            )
        })
        .collect();
    TrigPoly::from_exact_terms(terms)
}

/// Splits a polynomial over three dissociate frequencies into residual
/// classes by the signs carried on the two fastest modes.
fn group_by_top(p: &TrigPoly, n2: i64, n3: i64) -> Vec<(i64, i64, i64, Complex64)> {
    let mut out = Vec::new();
    for freq in p.frequencies() {
        let c = p.coeff(freq).to_complex();
        if c.norm() == 0.0 {
            continue;
        }
        let mut rest = freq;
        let mut e3 = 0i64;
        let mut e2 = 0i64;
        for (mode, e) in [(n3, &mut e3), (n2, &mut e2)] {
            if rest.abs() >= mode - mode / 2 {
                *e = if rest > 0 { 1 } else { -1 };
                rest -= *e * mode;
            }
        }
        out.push((e2, e3, rest, c));
    }
    out
}

/// Fourier coefficients of R^p decay like deg R / |n|:
/// |coeff(R^p, n)| <= (2 pi p deg R / |n|) mean R^p, exactly computable for
/// integer p.
pub fn check_riesz_fourier_decay(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let seq = LacunarySeq::make(3, Ratio::from_integer(3), 3, None)?;
    let r = riesz_product(&seq, 3)?;
    let degr = r.degree() as f64;
    let mut out = Vec::new();
    for p in 1u32..=3 {
        let w = r.pow(p, ctx.budget)?;
        let mw = rational_to_f64(&exact_mean(&w)?);
        for &n in &[1i64, 3, 13, 27, 40, 117, 200, 1000] {
            let c = w.coeff(n).to_complex().norm();
            let rhs = TAU * f64::from(p) * degr / n as f64 * mw;
            out.push(CheckResult::with_slack(
                "riesz-fourier-decay",
                &format!("p={p} n={n}"),
                c,
                rhs,
                rhs - c,
                1e-12 * (1.0 + rhs),
                "exact",
                ctx.seed,
            ));
        }
    }
    Ok(out)
}

/// Absorbing the next factor into a partial product moves the moment by at
/// most the factor 1 +- 2 pi p / (d - 1) when the ratio floor d is at least
/// 2 pi p + 1. Both moments are exact rationals.
pub fn check_adjacent_block_factorization(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for &(p, d) in &[(1u32, 8i64), (2, 14), (3, 20)] {
        let seq = LacunarySeq::make(d, Ratio::from_integer(d), 3, None)?;
        let bound = TAU * f64::from(p) / (d - 1) as f64;
        for l in 1usize..=2 {
            let num = partial_moment_rational(&seq, 1, l + 1, p, ctx.budget)?;
            let den =
                partial_moment_rational(&seq, 1, l, p, ctx.budget)? * x_moment_rational(u64::from(p));
            let ratio = rational_to_f64(&(num / den));
            out.push(CheckResult::with_slack(
                "adjacent-block-factorization",
                &format!("p={p} d={d} blocks=1..{l}"),
                (ratio - 1.0).abs(),
                bound,
                bound - (ratio - 1.0).abs(),
                1e-12 * (1.0 + bound),
                "exact",
                ctx.seed,
            ));
        }
    }
    Ok(out)
}

/// Appending bounded powers of later factors to R_k^p inflates the moment
/// by at most 1 + eps with eps = (4 pi d/(d-1)) p(2p+1)/(d-2p-1), for ratio
/// floor d > 2p+1 and exponents l_i <= p.
pub fn check_mixed_moment_factor_bound(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let x = TrigPoly::one().add(&TrigPoly::cosine(1));
    // Integer exponents: both sides exact; dissociation makes the two cores
    // equal, so the margin is exactly eps times the core.
    for &(p, d, k, tail) in &[
        (1u32, 4i64, 1usize, &[1u32, 1][..]),
        (1, 8, 2, &[1]),
        (2, 8, 1, &[2, 1]),
        (2, 14, 2, &[1, 2]),
    ] {
        let seq = LacunarySeq::make(3, Ratio::from_integer(d), (k + tail.len()).max(2), None)?;
        let rk = partial_product(&seq, 1, k)?;
        let mut g = TrigPoly::one();
        let mut g_mean = BigRational::one();
        for (i, &li) in tail.iter().enumerate() {
            let factor = x.pow(li, ctx.budget)?.scale_frequency(seq.modes()[k + i])?;
            g = g.multiply(&factor)?;
            g_mean *= x_moment_rational(u64::from(li));
        }
        let lhs = exact_weighted_power_mean(&rk, p, &g, ctx.budget)?;
        let core = exact_power_mean(&rk, p, ctx.budget)? * g_mean;
        let eps = mixing_eps(f64::from(p), d as f64);
        let rhs = (1.0 + eps) * rational_to_f64(&core);
        let lhs_f = rational_to_f64(&lhs);
        out.push(CheckResult::with_slack(
            "mixed-moment-factor-bound",
            &format!("p={p} d={d} k={k} tail={tail:?}"),
            lhs_f,
            rhs,
            rhs - lhs_f,
            1e-12 * (1.0 + rhs),
            "exact",
            ctx.seed,
        ));
    }
    // Fractional exponents by quadrature.
    for &(p, d) in &[(1.5f64, 8i64), (1.5, 30), (2.5, 30)] {
        let seq = LacunarySeq::make(3, Ratio::from_integer(d), 3, None)?;
        let m = seq.modes().to_vec();
        let hint = hint_for(m[2]);
        let est = mean_closure(ctx, hint, |t| {
            (1.0 + (m[0] as f64 * t).cos()).powf(p)
                * (1.0 + (m[1] as f64 * t).cos())
                * (1.0 + (m[2] as f64 * t).cos())
        })?;
        let core = x_moment(p)?.value;
        let eps = mixing_eps(p, d as f64);
        let rhs = (1.0 + eps) * core;
        out.push(CheckResult::with_slack(
            "mixed-moment-factor-bound",
            &format!("p={p} d={d} k=1 tail=[1, 1]"),
            est.value,
            rhs,
            rhs - est.value,
            quad_slack(est.error_estimate + (1.0 + eps) * 1e-14),
            "quadrature",
            ctx.seed,
        ));
    }
    Ok(out)
}

/// eps = (4 pi d / (d-1)) p (2p+1) / (d - 2p - 1).
pub fn mixing_eps(p: f64, d: f64) -> f64 {
    4.0 * PI * d / (d - 1.0) * p * (2.0 * p + 1.0) / (d - 2.0 * p - 1.0)
}
