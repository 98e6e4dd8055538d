//! Two-sided moment equivalence for weighted sums of Riesz products: ratio
//! computation with exact and quadrature backends, candidate-constant
//! checks, the L1 floor at ratio 3, and a deterministic adversarial search
//! for the best constants observable at desk scale.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riesz_core::error::{Error, Result};
use riesz_core::lacunary::LacunarySeq;
use riesz_core::moments::{
    lp_even_exact, norm_moment, rational_to_f64, riesz_moment_quadrature, riesz_moment_rational,
};
use riesz_core::riesz::weighted_sum;
use riesz_core::trigpoly::ENorm;
use serde::{Deserialize, Serialize};

use crate::check::{quad_slack, CheckResult};
use crate::constants::{
    lower_constant_formula, upper_constant, upper_ratio_floor_d, L1_LOWER_FLOOR,
};
use crate::lemmas::CheckCtx;

/// Both sides of the equivalence at one coefficient choice.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub ratio: f64,
    pub lhs: f64,
    pub weighted: f64,
    pub method: &'static str,
    pub error: f64,
}

/// Candidate constants for the two-sided check.
#[derive(Debug, Clone)]
pub struct TheoremCandidates {
    pub lower: f64,
    pub upper: f64,
    pub source: &'static str,
}

/// Closed-form candidates: the published constants, with the easy upper
/// constant 1 at p = 1.
pub fn formula_candidates(p: f64) -> TheoremCandidates {
    if p == 1.0 {
        TheoremCandidates {
            lower: L1_LOWER_FLOOR,
            upper: 1.0,
            source: "formula",
        }
    } else {
        TheoremCandidates {
            lower: lower_constant_formula(p),
            upper: upper_constant(p),
            source: "formula",
        }
    }
}

/// mean ||sum v_k R_k||^p over the weighted moment sum sum ||v_k||^p
/// mean R_k^p. Even integer p with a Euclidean or scalar norm goes through
/// exact coefficient arithmetic; everything else through adaptive
/// quadrature on the product form.
pub fn moment_ratio(
    seq: &LacunarySeq,
    coeffs: &[Vec<f64>],
    e_norm: ENorm,
    p: f64,
    ctx: &CheckCtx,
) -> Result<RatioReport> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("need at least v_0".into()));
    }
    let dim = coeffs[0].len();
    let p_int = if p.fract() == 0.0 && p >= 1.0 && p <= u32::MAX as f64 {
        Some(p as u32)
    } else {
        None
    };
    let mut weighted = 0.0;
    let mut w_err = 0.0;
    for (k, v) in coeffs.iter().enumerate() {
        let vn = e_norm.norm(v);
        if vn == 0.0 {
            continue;
        }
        let mk = match p_int {
            Some(q) => rational_to_f64(&riesz_moment_rational(seq, k, q, ctx.budget)?),
            None => {
                let rep = riesz_moment_quadrature(seq, k, p, ctx.tol)?;
                w_err += vn.powf(p) * rep.error_estimate;
                rep.value
            }
        };
        weighted += vn.powf(p) * mk;
    }
    if weighted == 0.0 {
        return Err(Error::InvalidArgument(
            "all coefficient vectors vanish".into(),
        ));
    }
    let even_exact =
        matches!(p_int, Some(q) if q % 2 == 0) && (dim == 1 || e_norm == ENorm::L2);
    let (lhs, lhs_err, method) = if even_exact {
        let f = weighted_sum(seq, coeffs, e_norm)?;
        let m = rational_to_f64(&lp_even_exact(&f, p as u32, ctx.budget)?);
        (m, 0.0, "exact")
    } else {
        let rep = norm_moment(seq, coeffs, e_norm, p, None, ctx.tol, ctx.max_points)?;
        (rep.value, rep.error_estimate, "quadrature")
    };
    let ratio = lhs / weighted;
    let error = (lhs_err + ratio * w_err) / weighted;
    Ok(RatioReport {
        ratio,
        lhs,
        weighted,
        method,
        error,
    })
}

/// Compact coefficient label for instance strings.
pub fn coeff_label(coeffs: &[Vec<f64>]) -> String {
    let rows: Vec<String> = coeffs
        .iter()
        .map(|v| {
            v.iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    format!("[{}]", rows.join(";"))
}

/// Both directions of the moment equivalence at one instance, against the
/// supplied candidate constants.
pub fn check_main_theorem(
    seq: &LacunarySeq,
    coeffs: &[Vec<f64>],
    e_norm: ENorm,
    p: f64,
    cands: &TheoremCandidates,
    label: &str,
    ctx: &CheckCtx,
) -> Result<[CheckResult; 2]> {
    let rep = moment_ratio(seq, coeffs, e_norm, p, ctx)?;
    let slack = if rep.method == "exact" {
        1e-12 * (1.0 + rep.ratio)
    } else {
        quad_slack(rep.error)
    };
    let lower_id = if p == 1.0 {
        "l1-lower-floor"
    } else {
        "norm-equivalence-lower"
    };
    let method = format!("{}+{}", rep.method, cands.source);
    let lower = CheckResult::with_slack(
        lower_id,
        &format!("{label} ratio={:.6e}", rep.ratio),
        rep.ratio,
        cands.lower,
        rep.ratio - cands.lower,
        slack,
        &method,
        ctx.seed,
    );
    let upper = CheckResult::with_slack(
        "norm-equivalence-upper",
        &format!("{label} ratio={:.6e}", rep.ratio),
        rep.ratio,
        cands.upper,
        cands.upper - rep.ratio,
        slack,
        &method,
        ctx.seed,
    );
    Ok([lower, upper])
}

/// Outcome of the adversarial coefficient search at one configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub p: f64,
    pub n_upper: usize,
    pub seq: String,
    pub e_norm: String,
    pub dim: usize,
    pub empirical_lower: f64,
    pub empirical_upper: f64,
    pub argmin: Vec<Vec<f64>>,
    pub argmax: Vec<Vec<f64>>,
    pub budget: u64,
    pub seed: u64,
}

/// Fixed-grid evaluator for the search: the trapezoid rule is exact for
/// the even-integer-p metric once the grid resolves the degree, and a
/// consistent approximate metric otherwise.
pub struct SearchGrid {
    partials: Vec<Vec<f64>>,
    mk: Vec<f64>,
    e_norm: ENorm,
    p: f64,
    m: usize,
}

/// True when the grid metric integrates a trigonometric polynomial, so the
/// trapezoid rule is exact once the grid resolves its degree.
pub fn metric_is_exact(p: f64, e_norm: ENorm, dim: usize) -> bool {
    p.fract() == 0.0 && (p as u64).is_multiple_of(2) && (dim == 1 || e_norm == ENorm::L2)
}

impl SearchGrid {
    pub fn build(
        seq: &LacunarySeq,
        n_upper: usize,
        e_norm: ENorm,
        dim: usize,
        p: f64,
        ctx: &CheckCtx,
    ) -> Result<Self> {
        if n_upper > seq.len() {
            return Err(Error::InvalidArgument(format!(
                "{n_upper} factors from a sequence of length {}",
                seq.len()
            )));
        }
        let deg: i64 = seq.modes()[..n_upper].iter().sum();
        let need = (p.ceil().max(2.0) as u64)
            .saturating_mul(deg.unsigned_abs())
            .saturating_add(1);
        let floor = if metric_is_exact(p, e_norm, dim) {
            1024
        } else {
            8192
        };
        let m = need.max(floor).next_power_of_two().min(1 << 18) as usize;
        let ts: Vec<f64> = (0..m)
            .map(|i| std::f64::consts::TAU * i as f64 / m as f64)
            .collect();
        let mut partials = Vec::with_capacity(n_upper + 1);
        partials.push(vec![1.0f64; m]);
        for &n in &seq.modes()[..n_upper] {
            let prev = partials.last().expect("seeded with the constant row");
            let row: Vec<f64> = prev
                .iter()
                .zip(&ts)
                .map(|(a, t)| a * (1.0 + (n as f64 * t).cos()))
                .collect();
            partials.push(row);
        }
        let mut mk = Vec::with_capacity(n_upper + 1);
        for (k, row) in partials.iter().enumerate() {
            let value = if p.fract() == 0.0 {
                rational_to_f64(&riesz_moment_rational(seq, k, p as u32, ctx.budget)?)
            } else {
                row.iter().map(|x| x.powf(p)).sum::<f64>() / m as f64
            };
            mk.push(value);
        }
        Ok(SearchGrid {
            partials,
            mk,
            e_norm,
            p,
            m,
        })
    }

    /// The equivalence ratio of one coefficient choice under the grid
    /// metric.
    pub fn ratio(&self, coeffs: &[Vec<f64>]) -> f64 {
        let dim = coeffs[0].len();
        let mut den = 0.0;
        for (v, mk) in coeffs.iter().zip(&self.mk) {
            den += self.e_norm.norm(v).powf(self.p) * mk;
        }
        if den == 0.0 {
            return f64::NAN;
        }
        let mut num = 0.0;
        let mut acc = vec![0.0f64; dim];
        for i in 0..self.m {
            acc.fill(0.0);
            for (v, row) in coeffs.iter().zip(&self.partials) {
                let r = row[i];
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x * r;
                }
            }
            num += self.e_norm.norm(&acc).powf(self.p);
        }
        num / (self.m as f64 * den)
    }
}

const DESCENT_FACTORS: [f64; 5] = [0.5, 0.9, 1.1, 2.0, -1.0];

/// Cyclic multiplicative-perturbation cursor around a current center.
struct Cursor {
    center: Vec<Vec<f64>>,
    value: f64,
    k: usize,
    i: usize,
    f: usize,
}

impl Cursor {
    fn new(center: Vec<Vec<f64>>, value: f64) -> Self {
        Cursor {
            center,
            value,
            k: 0,
            i: 0,
            f: 0,
        }
    }

    fn proposal(&mut self) -> Vec<Vec<f64>> {
        let mut cand = self.center.clone();
        cand[self.k][self.i] *= DESCENT_FACTORS[self.f];
        self.f += 1;
        if self.f == DESCENT_FACTORS.len() {
            self.f = 0;
            self.i += 1;
            if self.i == self.center[self.k].len() {
                self.i = 0;
                self.k = (self.k + 1) % self.center.len();
            }
        }
        cand
    }

    fn adopt(&mut self, center: Vec<Vec<f64>>, value: f64) {
        self.center = center;
        self.value = value;
        self.k = 0;
        self.i = 0;
        self.f = 0;
    }
}

fn anchor_candidates(n_upper: usize, dim: usize) -> Vec<Vec<Vec<f64>>> {
    let basis = |j: usize| {
        let mut v = vec![0.0; dim];
        v[j % dim] = 1.0;
        v
    };
    let zero = vec![0.0; dim];
    let mut anchors = Vec::new();
    // v = e_0 pins the ratio 1 into both envelopes.
    let mut e0 = vec![zero.clone(); n_upper + 1];
    e0[0] = basis(0);
    anchors.push(e0);
    anchors.push((0..=n_upper).map(basis).collect());
    anchors.push(
        (0..=n_upper)
            .map(|k| {
                let mut v = basis(k);
                if k % 2 == 1 {
                    for x in v.iter_mut() {
                        *x = -*x;
                    }
                }
                v
            })
            .collect(),
    );
    let mut top = vec![zero; n_upper + 1];
    top[n_upper] = basis(0);
    anchors.push(top);
    anchors
}

fn sign_patterns(n_upper: usize) -> Vec<Vec<Vec<f64>>> {
    if n_upper > 12 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(1 << n_upper);
    for code in 0u32..(1 << n_upper) {
        let mut v = vec![vec![1.0]];
        for b in 0..n_upper {
            let s: f64 = if code >> b & 1 == 1 { -1.0 } else { 1.0 };
            v.push(vec![s]);
        }
        out.push(v);
    }
    out
}

fn random_candidate(rng: &mut ChaCha8Rng, n_upper: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut cand = Vec::with_capacity(n_upper + 1);
    for _ in 0..=n_upper {
        let sparse = rng.gen::<f64>() < 0.25;
        let v: Vec<f64> = (0..dim)
            .map(|_| if sparse { 0.0 } else { rng.gen_range(-1.0..=1.0) })
            .collect();
        cand.push(v);
    }
    if cand.iter().all(|v| v.iter().all(|x| *x == 0.0)) {
        cand[0][0] = 1.0;
    }
    cand
}

/// Searches for the extreme equivalence ratios over coefficient vectors:
/// exhaustive sign patterns for scalar instances, random candidates, and
/// two multiplicative coordinate-descent cursors chasing the running
/// minimum and maximum. The evaluation sequence is a deterministic
/// function of (seed, stream), and a larger budget evaluates a superset,
/// so the empirical envelope can only widen with budget.
#[allow(clippy::too_many_arguments)]
pub fn estimate_lower_constant(
    seq: &LacunarySeq,
    p: f64,
    n_upper: usize,
    e_norm: ENorm,
    dim: usize,
    budget: u64,
    seed: u64,
    stream: u64,
    ctx: &CheckCtx,
) -> Result<ConstantEstimate> {
    if budget == 0 {
        return Err(Error::InvalidArgument("search budget must be >= 1".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let grid = SearchGrid::build(seq, n_upper, e_norm, dim, p, ctx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut queue: VecDeque<Vec<Vec<f64>>> = VecDeque::new();
    for a in anchor_candidates(n_upper, dim) {
        queue.push_back(a);
    }
    if dim == 1 {
        for s in sign_patterns(n_upper) {
            queue.push_back(s);
        }
    }
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut worst: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut down: Option<Cursor> = None;
    let mut up: Option<Cursor> = None;
    let mut phase = 0u8;
    for _ in 0..budget {
        let cand = if let Some(front) = queue.pop_front() {
            front
        } else {
            let pick = phase;
            phase = (phase + 1) % 3;
            match pick {
                0 => random_candidate(&mut rng, n_upper, dim),
                1 => down.as_mut().expect("cursor set").proposal(),
                _ => up.as_mut().expect("cursor set").proposal(),
            }
        };
        let value = grid.ratio(&cand);
        if !value.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, cand.clone()));
            match down.as_mut() {
                Some(c) => c.adopt(cand.clone(), value),
                None => down = Some(Cursor::new(cand.clone(), value)),
            }
        } else if down.is_none() {
            down = Some(Cursor::new(cand.clone(), value));
        }
        if worst.as_ref().is_none_or(|(w, _)| value > *w) {
            worst = Some((value, cand.clone()));
            match up.as_mut() {
                Some(c) => c.adopt(cand.clone(), value),
                None => up = Some(Cursor::new(cand.clone(), value)),
            }
        } else if up.is_none() {
            up = Some(Cursor::new(cand, value));
        }
    }
    let (empirical_lower, argmin) = best.expect("budget >= 1 evaluated a candidate");
    let (empirical_upper, argmax) = worst.expect("budget >= 1 evaluated a candidate");
    Ok(ConstantEstimate {
        p,
        n_upper,
        seq: seq.to_string(),
        e_norm: e_norm.label().to_string(),
        dim,
        empirical_lower,
        empirical_upper,
        argmin,
        argmax,
        budget,
        seed,
    })
}

/// Upper-bound battery at the published ratio floors: every tested ratio
/// stays under (16p)^(p+1), with the trivial single-term instance pinned
/// at ratio exactly 1.
pub fn check_norm_equivalence_upper(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    // Trivial single-term instance: both sides coincide.
    {
        let seq = LacunarySeq::make(4, num_rational::Ratio::from_integer(4), 1, None)?;
        let rep = moment_ratio(&seq, &[vec![1.0]], ENorm::L2, 2.0, ctx)?;
        out.push(CheckResult::exact(
            "norm-equivalence-upper",
            "p=2 N=0 single-term",
            rep.ratio,
            1.0,
            0.0,
            rep.ratio == 1.0,
        ));
    }
    let planar = |signs: &[f64]| -> Vec<Vec<f64>> {
        signs
            .iter()
            .enumerate()
            .map(|(k, s)| {
                if k % 2 == 0 {
                    vec![*s, 0.0]
                } else {
                    vec![0.0, *s]
                }
            })
            .collect()
    };
    let scalar = |signs: &[f64]| -> Vec<Vec<f64>> { signs.iter().map(|s| vec![*s]).collect() };
    struct UpperCase {
        p: f64,
        coeffs: Vec<Vec<f64>>,
        e_norm: ENorm,
        label: &'static str,
    }
    let cases = vec![
        UpperCase {
            p: 1.5,
            coeffs: scalar(&[1.0, -1.0, 1.0, -1.0]),
            e_norm: ENorm::L2,
            label: "N=3 scalar alternating",
        },
        UpperCase {
            p: 1.5,
            coeffs: planar(&[1.0, 1.0, -1.0, 1.0]),
            e_norm: ENorm::L2,
            label: "N=3 planar l2",
        },
        UpperCase {
            p: 2.0,
            coeffs: scalar(&[1.0, -1.0, 1.0, -1.0]),
            e_norm: ENorm::L2,
            label: "N=3 scalar alternating",
        },
        UpperCase {
            p: 2.0,
            coeffs: planar(&[1.0, -1.0, 1.0, -1.0]),
            e_norm: ENorm::L2,
            label: "N=3 planar l2",
        },
        UpperCase {
            p: 2.0,
            coeffs: planar(&[1.0, -1.0, 0.5]),
            e_norm: ENorm::L1,
            label: "N=2 planar l1",
        },
        UpperCase {
            p: 2.0,
            coeffs: planar(&[1.0, 1.0, -1.0]),
            e_norm: ENorm::Linf,
            label: "N=2 planar linf",
        },
        UpperCase {
            p: 3.0,
            coeffs: scalar(&[1.0, -1.0, 1.0]),
            e_norm: ENorm::L2,
            label: "N=2 scalar alternating",
        },
        UpperCase {
            p: 3.0,
            coeffs: planar(&[1.0, 0.5, -1.0]),
            e_norm: ENorm::L2,
            label: "N=2 planar l2",
        },
    ];
    for case in cases {
        let d = upper_ratio_floor_d(case.p).ceil() as i64;
        let seq = LacunarySeq::make(
            4,
            num_rational::Ratio::from_integer(d),
            case.coeffs.len() - 1,
            None,
        )?;
        let cands = formula_candidates(case.p);
        let label = format!(
            "p={} d={d} {} v={} {}",
            case.p,
            case.label,
            coeff_label(&case.coeffs),
            case.e_norm,
        );
        let tol_ctx = CheckCtx {
            tol: ctx.tol.max(1e-8),
            ..*ctx
        };
        let [_, upper] =
            check_main_theorem(&seq, &case.coeffs, case.e_norm, case.p, &cands, &label, &tol_ctx)?;
        out.push(upper);
    }
    Ok(out)
}

/// Lower-bound battery for p > 1 at desk-scale ratios: the adversarial
/// search freezes the observed minimum; the named instances then dominate
/// it, the argmin reproduces it, and it sits far above the closed-form
/// floor (whose own ratio hypothesis is astronomically out of reach).
pub fn check_norm_equivalence_lower(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    struct LowerCase {
        p: f64,
        d: i64,
        n_upper: usize,
        dim: usize,
        e_norm: ENorm,
        budget: u64,
        stream: u64,
    }
    let cases = vec![
        LowerCase {
            p: 2.0,
            d: 4,
            n_upper: 4,
            dim: 1,
            e_norm: ENorm::L2,
            budget: 1500,
            stream: 1,
        },
        LowerCase {
            p: 2.0,
            d: 4,
            n_upper: 3,
            dim: 2,
            e_norm: ENorm::L2,
            budget: 1500,
            stream: 2,
        },
        LowerCase {
            p: 1.5,
            d: 4,
            n_upper: 3,
            dim: 1,
            e_norm: ENorm::L2,
            budget: 900,
            stream: 3,
        },
        LowerCase {
            p: 3.0,
            d: 8,
            n_upper: 3,
            dim: 1,
            e_norm: ENorm::L2,
            budget: 900,
            stream: 4,
        },
    ];
    for case in cases {
        let seq = LacunarySeq::make(
            4,
            num_rational::Ratio::from_integer(case.d),
            case.n_upper,
            None,
        )?;
        let est = estimate_lower_constant(
            &seq,
            case.p,
            case.n_upper,
            case.e_norm,
            case.dim,
            case.budget,
            ctx.seed,
            case.stream,
            ctx,
        )?;
        let tag = format!(
            "p={} d={} N={} dim={} {}",
            case.p, case.d, case.n_upper, case.dim, case.e_norm
        );
        out.push(CheckResult::with_slack(
            "norm-equivalence-lower",
            &format!("{tag} empirical-min-positive c={:.6e}", est.empirical_lower),
            est.empirical_lower,
            0.0,
            est.empirical_lower,
            0.0,
            "search",
            ctx.seed,
        ));
        out.push(CheckResult::with_slack(
            "norm-equivalence-lower",
            &format!("{tag} envelope-order"),
            est.empirical_lower,
            est.empirical_upper,
            est.empirical_upper - est.empirical_lower,
            0.0,
            "search",
            ctx.seed,
        ));
        // The argmin reproduces its ratio under the rigorous backend, to
        // within the grid metric's accuracy class.
        let tol_ctx = CheckCtx {
            tol: ctx.tol.max(1e-8),
            ..*ctx
        };
        let rep = moment_ratio(&seq, &est.argmin, case.e_norm, case.p, &tol_ctx)?;
        let metric_tol = if metric_is_exact(case.p, case.e_norm, case.dim) {
            1e-9
        } else {
            2e-5
        };
        let tol = quad_slack(rep.error) + metric_tol * (1.0 + rep.ratio);
        out.push(CheckResult::with_slack(
            "norm-equivalence-lower",
            &format!("{tag} argmin-reproduces v={}", coeff_label(&est.argmin)),
            rep.ratio,
            est.empirical_lower,
            -(rep.ratio - est.empirical_lower).abs(),
            tol,
            rep.method,
            ctx.seed,
        ));
        // Named instances dominate the frozen minimum.
        for (coeffs, vlabel) in [
            (
                anchor_candidates(case.n_upper, case.dim)[1].clone(),
                "all-ones",
            ),
            (
                anchor_candidates(case.n_upper, case.dim)[2].clone(),
                "alternating",
            ),
        ] {
            let rep = moment_ratio(&seq, &coeffs, case.e_norm, case.p, &tol_ctx)?;
            out.push(CheckResult::with_slack(
                "norm-equivalence-lower",
                &format!("{tag} {vlabel} ratio={:.6e}", rep.ratio),
                rep.ratio,
                est.empirical_lower,
                rep.ratio - est.empirical_lower,
                quad_slack(rep.error) + 1e-9,
                rep.method,
                ctx.seed,
            ));
        }
        // The published closed-form constant sits far below the observed
        // minimum; its ratio hypothesis cannot be met at desk scale, so
        // this is a consistency reading, not a theorem instance.
        let formula = lower_constant_formula(case.p);
        out.push(CheckResult::with_slack(
            "norm-equivalence-lower",
            &format!("{tag} formula-floor-below-empirical"),
            est.empirical_lower,
            formula,
            est.empirical_lower - formula,
            0.0,
            "search",
            ctx.seed,
        ));
    }
    Ok(out)
}

/// The L1 floor at ratio 3: mean |sum v_j R_j| >= 2e-5 sum ||v_j||, checked
/// on the worst sign pattern the search finds and on named instances,
/// including the exact unit-ratio cases.
pub fn check_l1_lower_floor(ctx: &CheckCtx) -> Result<Vec<CheckResult>> {
    let n_upper = 6;
    let seq = LacunarySeq::make(3, num_rational::Ratio::from_integer(3), n_upper, None)?;
    let est = estimate_lower_constant(
        &seq,
        1.0,
        n_upper,
        ENorm::L2,
        1,
        1200,
        ctx.seed,
        5,
        ctx,
    )?;
    let mut out = Vec::new();
    out.push(CheckResult::with_slack(
        "l1-lower-floor",
        &format!(
            "search-min d=3 N={n_upper} c={:.6e} argmin={}",
            est.empirical_lower,
            coeff_label(&est.argmin)
        ),
        est.empirical_lower,
        L1_LOWER_FLOOR,
        est.empirical_lower - L1_LOWER_FLOOR,
        1e-4 * est.empirical_lower.abs(),
        "search",
        ctx.seed,
    ));
    let tol_ctx = CheckCtx {
        tol: ctx.tol.max(1e-8),
        ..*ctx
    };
    let cands = formula_candidates(1.0);
    // The worst pattern found, re-run through the rigorous backend, and
    // the named patterns; each also checks the easy upper constant 1.
    let planar_alt: Vec<Vec<f64>> = (0..=n_upper)
        .map(|k| {
            if k % 2 == 0 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, -1.0]
            }
        })
        .collect();
    let named: Vec<(Vec<Vec<f64>>, ENorm, String)> = vec![
        (est.argmin.clone(), ENorm::L2, "argmin".to_string()),
        (
            anchor_candidates(n_upper, 1)[2].clone(),
            ENorm::L2,
            "alternating".to_string(),
        ),
        (planar_alt, ENorm::L2, "planar-alternating".to_string()),
    ];
    for (coeffs, e_norm, vlabel) in named {
        let label = format!(
            "p=1 d=3 N={n_upper} {vlabel} v={} {}",
            coeff_label(&coeffs),
            e_norm
        );
        let [lower, upper] =
            check_main_theorem(&seq, &coeffs, e_norm, 1.0, &cands, &label, &tol_ctx)?;
        out.push(lower);
        out.push(upper);
    }
    // All-ones and single-top have unit ratio exactly: the sum has unit
    // mean against each weight.
    for (coeffs, vlabel) in [
        (anchor_candidates(n_upper, 1)[1].clone(), "all-ones"),
        (anchor_candidates(n_upper, 1)[3].clone(), "single-top"),
    ] {
        let f = weighted_sum(&seq, &coeffs, ENorm::L2)?;
        let mean = rational_to_f64(&riesz_core::moments::exact_power_mean(
            f.coord(0),
            1,
            ctx.budget,
        )?);
        let total: f64 = coeffs.iter().map(|v| v[0].abs()).sum();
        out.push(CheckResult::exact(
            "l1-lower-floor",
            &format!("p=1 d=3 N={n_upper} {vlabel} unit-ratio"),
            mean / total,
            1.0,
            mean / total - 1.0,
            mean == total,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> CheckCtx {
        CheckCtx::default()
    }

    fn small_seq() -> LacunarySeq {
        LacunarySeq::make(4, num_rational::Ratio::from_integer(4), 4, None).unwrap()
    }

    #[test]
    fn single_term_ratios_are_exactly_one() {
        let seq = small_seq();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let rep = moment_ratio(&seq, &[vec![2.0]], ENorm::L2, p, &ctx()).unwrap();
            assert!(
                (rep.ratio - 1.0).abs() <= 1e-9,
                "p={p} ratio {}",
                rep.ratio
            );
        }
        let rep = moment_ratio(&seq, &[vec![1.0]], ENorm::L2, 2.0, &ctx()).unwrap();
        assert_eq!(rep.ratio, 1.0);
    }

    #[test]
    fn exact_and_quadrature_backends_agree() {
        let seq = small_seq();
        let coeffs = vec![vec![1.0], vec![-1.0], vec![1.0]];
        let exact = moment_ratio(&seq, &coeffs, ENorm::L2, 2.0, &ctx()).unwrap();
        assert_eq!(exact.method, "exact");
        let quad = norm_moment(&seq, &coeffs, ENorm::L2, 2.0, None, 1e-10, 1 << 22).unwrap();
        assert!((exact.lhs - quad.value).abs() <= 1e-8 * exact.lhs.abs());
    }

    #[test]
    fn search_envelope_brackets_one_and_reproduces() {
        let seq = small_seq();
        let est = estimate_lower_constant(
            &seq,
            2.0,
            3,
            ENorm::L2,
            1,
            600,
            7,
            0,
            &ctx(),
        )
        .unwrap();
        assert!(est.empirical_lower <= 1.0 + 1e-12);
        assert!(est.empirical_upper >= 1.0 - 1e-12);
        assert!(est.empirical_lower <= est.empirical_upper);
        let grid = SearchGrid::build(&seq, 3, ENorm::L2, 1, 2.0, &ctx()).unwrap();
        assert_eq!(grid.ratio(&est.argmin), est.empirical_lower);
        assert_eq!(grid.ratio(&est.argmax), est.empirical_upper);
        // The grid metric matches the exact backend at even p.
        let rep = moment_ratio(&seq, &est.argmin, ENorm::L2, 2.0, &ctx()).unwrap();
        assert!((rep.ratio - est.empirical_lower).abs() <= 1e-9 * (1.0 + rep.ratio));
    }

    #[test]
    fn doubling_the_budget_never_raises_the_minimum() {
        let seq = small_seq();
        for (budget_small, budget_large) in [(50u64, 100u64), (300, 600)] {
            let small = estimate_lower_constant(
                &seq, 2.0, 3, ENorm::L2, 1, budget_small, 11, 0, &ctx(),
            )
            .unwrap();
            let large = estimate_lower_constant(
                &seq, 2.0, 3, ENorm::L2, 1, budget_large, 11, 0, &ctx(),
            )
            .unwrap();
            assert!(large.empirical_lower <= small.empirical_lower);
            assert!(large.empirical_upper >= small.empirical_upper);
        }
    }

    #[test]
    fn upper_battery_trivial_instance_is_exact() {
        // Only the exact p=2 cases, to keep the default test run fast.
        let seq = LacunarySeq::make(4, num_rational::Ratio::from_integer(320), 4, None).unwrap();
        let coeffs = vec![vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]];
        let cands = formula_candidates(2.0);
        let [lower, upper] =
            check_main_theorem(&seq, &coeffs, ENorm::L2, 2.0, &cands, "test", &ctx()).unwrap();
        assert!(upper.pass, "upper margin {}", upper.margin);
        // The formula lower floor is microscopic, so it passes too.
        assert!(lower.pass, "lower margin {}", lower.margin);
        assert!(upper.lhs < 10.0, "ratio should be moderate: {}", upper.lhs);
    }

    #[test]
    #[ignore = "heavy quadrature; the acceptance suite runs it"]
    fn norm_equivalence_batteries_pass() {
        for r in check_norm_equivalence_upper(&ctx()).unwrap() {
            assert!(r.pass, "{} [{}] margin {}", r.statement_id, r.instance, r.margin);
        }
        for r in check_norm_equivalence_lower(&ctx()).unwrap() {
            assert!(r.pass, "{} [{}] margin {}", r.statement_id, r.instance, r.margin);
        }
        for r in check_l1_lower_floor(&ctx()).unwrap() {
            assert!(r.pass, "{} [{}] margin {}", r.statement_id, r.instance, r.margin);
        }
    }
}
