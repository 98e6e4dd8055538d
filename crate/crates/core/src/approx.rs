//! Polynomial approximation utilities: Bernstein operators evaluated
//! stably, one-sided majorants for Lipschitz and power functions, and the
//! composite majorant that covers a weight density between g and 2g.
//!
//! A Bernstein polynomial is never expanded into the monomial basis; at the
//! degrees used here the expanded coefficients would dwarf f64 range. Instead
//! each evaluation rebuilds the binomial weights around their mode with a
//! two-sided recurrence, which touches O(sqrt(n)) weights and is stable for
//! any degree.

use crate::error::{Error, Result};
use crate::lacunary::LacunarySeq;
use crate::quadrature::{adaptive_mean, ClosureGridFn};
use crate::riesz::{WeightChoice, WeightSpec};

/// Ceiling on Bernstein degrees; above this the sample table itself is the
/// bottleneck.
const MAX_BERNSTEIN_DEGREE: u64 = 1 << 22;

/// Relative cut for the binomial weight recurrence.
const WEIGHT_CUT: f64 = 1e-18;

/// Samples of a function on the uniform grid k/n, evaluated through the
/// Bernstein operator of degree n.
#[derive(Debug, Clone)]
pub struct BernsteinPoly {
    n: u64,
    samples: Vec<f64>,
}

impl BernsteinPoly {
    pub fn fit(n: u64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(1..=MAX_BERNSTEIN_DEGREE).contains(&n) {
            return Err(Error::TooLarge(format!("Bernstein degree {n}")));
        }
        let samples = (0..=n).map(|k| f(k as f64 / n as f64)).collect();
        Ok(BernsteinPoly { n, samples })
    }

    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 || samples.len() as u64 > MAX_BERNSTEIN_DEGREE {
            return Err(Error::TooLarge(format!("{} samples", samples.len())));
        }
        Ok(BernsteinPoly {
            n: samples.len() as u64 - 1,
            samples,
        })
    }

    pub fn degree(&self) -> u64 {
        self.n
    }

    /// Adds a constant; the operator reproduces constants, so this shifts
    /// the polynomial itself.
    pub fn shift(&mut self, delta: f64) {
        for s in &mut self.samples {
            *s += delta;
        }
    }

    /// B(x) = sum_k f(k/n) C(n,k) x^k (1-x)^{n-k} for x in [0, 1].
    ///
    /// Weights are generated outward from the mode of the binomial
    /// distribution and renormalized by their sum, so no binomial
    /// coefficient is ever formed.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.n;
        if !(0.0..=1.0).contains(&x) {
            let x = x.clamp(0.0, 1.0);
            return self.eval(x);
        }
        if x <= 0.0 {
            return self.samples[0];
        }
        if x >= 1.0 {
            return self.samples[n as usize];
        }
        let ratio_up = x / (1.0 - x);
        let mode = (((n + 1) as f64) * x).floor().min(n as f64) as u64;
        // Upward sweep from the mode, weight normalized to 1 there.
        let mut weight_sum = 1.0;
        let mut value_sum = self.samples[mode as usize];
        let mut q = 1.0;
        let mut k = mode;
        while k < n {
            q *= ((n - k) as f64 / (k + 1) as f64) * ratio_up;
            k += 1;
            weight_sum += q;
            value_sum += q * self.samples[k as usize];
            if q < WEIGHT_CUT {
                break;
            }
        }
        // Downward sweep.
        q = 1.0;
        k = mode;
        while k > 0 {
            q *= (k as f64 / (n - k + 1) as f64) / ratio_up;
            k -= 1;
            weight_sum += q;
            value_sum += q * self.samples[k as usize];
            if q < WEIGHT_CUT {
                break;
            }
        }
        value_sum / weight_sum
    }

    /// Largest value of f - B over a uniform grid (positive when B dips
    /// below f anywhere on the grid).
    pub fn max_deficit(&self, f: impl Fn(f64) -> f64, grid: usize) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..=grid {
            let x = i as f64 / grid as f64;
            worst = worst.max(f(x) - self.eval(x));
        }
        worst
    }
}

/// Majorant of a 1-Lipschitz function on [0, 1] by the stated rule: degree
/// n = ceil(4 / eps^2) and shift 1/(2 sqrt n). The shift dominates the
/// operator's worst-case deficit L sqrt(x(1-x)/n), so B + shift lies between
/// f and f + eps.
pub fn lipschitz_majorant(
    f: impl Fn(f64) -> f64,
    eps: f64,
) -> Result<(BernsteinPoly, u64, f64)> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance {eps}")));
    }
    let n = (4.0 / (eps * eps)).ceil() as u64;
    let shift = 0.5 / (n as f64).sqrt();
    let mut b = BernsteinPoly::fit(n, f)?;
    b.shift(shift);
    Ok((b, n, shift))
}

/// The model 1-Lipschitz profile (1 - t^p / 2)^(1/p) on [0, 1]: value 1 at
/// zero, 2^(-1/p) at one, decreasing.
pub fn f_profile(p: f64, t: f64) -> f64 {
    (1.0 - 0.5 * t.powf(p)).powf(1.0 / p)
}

/// One factor of the composite weight majorant: a polynomial w with
/// f_profile <= w <= (1 + eps) f_profile on [0, 1].
pub fn profile_majorant(p: f64, eps: f64) -> Result<(BernsteinPoly, u64, f64)> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("exponent {p}")));
    }
    // The profile stays above 2^(-1/p), so an additive budget of
    // eps 2^(-1/p) realizes the multiplicative one.
    let delta = eps * 2f64.powf(-1.0 / p);
    lipschitz_majorant(move |t| f_profile(p, t), delta)
}

/// Power-function majorant w(x) >= x^((p-1)/p) on [0, 2] tuned until the
/// single-factor contraction ratio drops below the target.
#[derive(Debug, Clone)]
pub struct PowerMajorant {
    pub p: f64,
    pub n: u64,
    bern: BernsteinPoly,
    scale: f64,
    /// mean w(1 + cos t)^p / (mean (1 + cos t)^p)^((p-1)/p).
    pub lambda1: f64,
}

impl PowerMajorant {
    pub fn eval(&self, x: f64) -> f64 {
        self.scale * self.bern.eval(0.5 * x.clamp(0.0, 2.0))
    }
}

/// Builds the majorant of x^alpha, alpha = (p-1)/p, on [0, 2]. The power is
/// not Lipschitz at zero, so no a-priori shift certifies it; instead the
/// deficit of each Bernstein fit is measured on a dense grid (uniformly and
/// geometrically refined toward zero) and folded into the shift, and the
/// degree doubles until lambda1 falls below the target.
pub fn power_majorant(p: f64, target_lambda1: f64, max_n: u64) -> Result<PowerMajorant> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "contraction ratio needs p > 1, got {p}"
        )));
    }
    if !(target_lambda1 > 0.0 && target_lambda1 <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target ratio {target_lambda1}"
        )));
    }
    let alpha = (p - 1.0) / p;
    let denom = {
        let m = crate::moments::x_moment(p)?;
        m.value.powf(alpha)
    };
    let scale = 2f64.powf(alpha);
    let mut n = 64u64;
    let mut best: Option<PowerMajorant> = None;
    while n <= max_n {
        let mut bern = BernsteinPoly::fit(n, |u| u.powf(alpha))?;
        let deficit = measured_deficit(&bern, alpha, n);
        bern.shift(deficit * (1.0 + 1e-9) + 1e-15);
        let cand = PowerMajorant {
            p,
            n,
            bern,
            scale,
            lambda1: f64::NAN,
        };
        let num = lambda1_numerator(&cand, p)?;
        let lambda1 = num / denom;
        let cand = PowerMajorant { lambda1, ..cand };
        if lambda1 < target_lambda1 {
            return Ok(cand);
        }
        best = Some(cand);
        n *= 2;
    }
    let reached = best.map(|b| b.lambda1).unwrap_or(f64::NAN);
    Err(Error::Budget(format!(
        "contraction ratio {reached} still above {target_lambda1} at degree {max_n}"
    )))
}

fn measured_deficit(bern: &BernsteinPoly, alpha: f64, n: u64) -> f64 {
    let grid = (4 * n).clamp(1 << 12, 1 << 16) as usize;
    let mut worst = bern.max_deficit(|u| u.powf(alpha), grid);
    // The deficit of a concave power concentrates near zero; refine there
    // geometrically.
    let mut x = 1.0 / grid as f64;
    while x > 1e-14 {
        for j in 1..16 {
            let u = x * j as f64 / 16.0;
            worst = worst.max(u.powf(alpha) - bern.eval(u));
        }
        x *= 0.5;
    }
    worst.max(0.0)
}

fn lambda1_numerator(w: &PowerMajorant, p: f64) -> Result<f64> {
    let grid = ClosureGridFn::new(|t: f64| w.eval(1.0 + t.cos()).powf(p), 512);
    let est = adaptive_mean(&grid, 1e-11, 1 << 20)?;
    Ok(est.value)
}

/// (1 + eps)(1 - eps)^((1-p)/p) lambda1: the ratio after donating a relative
/// eps of mass between the split pieces.
pub fn lambda2(p: f64, lambda1: f64, eps: f64) -> f64 {
    (1.0 + eps) * (1.0 - eps).powf((1.0 - p) / p) * lambda1
}

/// Largest dyadic eps = 2^-m with lambda2 < 1, scanning m = 1..=40.
pub fn admissible_eps(p: f64, lambda1: f64) -> Result<f64> {
    let mut tried = 0;
    for m in 1..=40u32 {
        let eps = 0.5f64.powi(m as i32);
        tried += 1;
        if lambda2(p, lambda1, eps) < 1.0 {
            return Ok(eps);
        }
    }
    Err(Error::NoAdmissibleEps { p, tried })
}

/// One factor of the composite majorant.
#[derive(Debug, Clone)]
enum MajorantFactor {
    One,
    Phi,
    Profile { poly: BernsteinPoly },
}

/// h(t) = 2^(-|I1|/p) prod_{I1} phi_k(n_j t) prod_{I2} w_j(phi_k(n_j t)),
/// built so that g <= h^p <= 2g for the density g of the matching weight.
#[derive(Debug, Clone)]
pub struct WeightMajorant {
    prefactor: f64,
    k: u32,
    p: f64,
    modes: Vec<i64>,
    factors: Vec<MajorantFactor>,
    /// Trigonometric degree of h after expansion (never performed).
    pub degree_bound: i128,
    /// Tolerances allotted to the profile factors, in factor order.
    pub epsilons: Vec<f64>,
}

impl WeightMajorant {
    pub fn build(spec: &WeightSpec, seq: &LacunarySeq) -> Result<Self> {
        spec.validate(seq)?;
        let l = spec.l;
        let mut factors = Vec::with_capacity(l);
        let mut epsilons = Vec::new();
        let mut half_count = 0u32;
        let mut degree: i128 = 0;
        for (j, choice) in spec.choices.iter().enumerate() {
            let mode = seq.modes()[j] as i128;
            match choice {
                WeightChoice::One => factors.push(MajorantFactor::One),
                WeightChoice::HalfPhi => {
                    half_count += 1;
                    degree += i128::from(spec.k) * mode;
                    factors.push(MajorantFactor::Phi);
                }
                WeightChoice::OneMinusHalfPhi => {
                    let eps = (2f64.ln() / spec.p) * 2f64.powi(j as i32 - l as i32);
                    let (poly, n, _shift) = profile_majorant(spec.p, eps)?;
                    degree += i128::from(n) * i128::from(spec.k) * mode;
                    epsilons.push(eps);
                    factors.push(MajorantFactor::Profile { poly });
                }
            }
        }
        Ok(WeightMajorant {
            prefactor: 2f64.powf(-(half_count as f64) / spec.p),
            k: spec.k,
            p: spec.p,
            modes: seq.modes()[..l].to_vec(),
            factors,
            degree_bound: degree,
            epsilons,
        })
    }

    /// phi_k(u) = ((1 - cos u)/2)^k.
    fn phi(&self, u: f64) -> f64 {
        (0.5 * (1.0 - u.cos())).powi(self.k as i32)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.prefactor;
        for (j, factor) in self.factors.iter().enumerate() {
            let y = self.phi(self.modes[j] as f64 * t);
            acc *= match factor {
                MajorantFactor::One => 1.0,
                MajorantFactor::Phi => y,
                MajorantFactor::Profile { poly } => poly.eval(y),
            };
        }
        acc
    }

    /// Worst grid margins of the sandwich g <= h^p <= 2g: returns
    /// (min of h^p - g, max of h^p - 2g); the first should be nonnegative
    /// and the second nonpositive up to rounding.
    pub fn sandwich_margins(
        &self,
        spec: &WeightSpec,
        seq: &LacunarySeq,
        grid: usize,
    ) -> (f64, f64) {
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for i in 0..grid {
            let t = std::f64::consts::TAU * i as f64 / grid as f64;
            let g = spec.eval(seq, t);
            let hp = self.eval(t).powf(self.p);
            lower = lower.min(hp - g);
            upper = upper.max(hp - 2.0 * g);
        }
        (lower, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn bernstein_reproduces_linear_functions() {
        let b = BernsteinPoly::fit(64, |x| 3.0 * x - 0.75).unwrap();
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            assert!((b.eval(x) - (3.0 * x - 0.75)).abs() < 1e-12);
        }
    }

    #[test]
    fn bernstein_of_square_has_known_bias() {
        // B_n[x^2](x) = x^2 + x(1-x)/n.
        for &n in &[8u64, 128, 4096] {
            let b = BernsteinPoly::fit(n, |x| x * x).unwrap();
            for &x in &[0.1, 0.5, 0.9] {
                let expect = x * x + x * (1.0 - x) / n as f64;
                assert!((b.eval(x) - expect).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn bernstein_endpoints_are_exact() {
        let b = BernsteinPoly::fit(100, |x| (7.0 * x).sin()).unwrap();
        assert_eq!(b.eval(0.0), 0.0);
        assert_eq!(b.eval(1.0), 7.0f64.sin());
        assert_eq!(b.eval(-0.5), b.eval(0.0));
        assert_eq!(b.eval(1.5), b.eval(1.0));
    }

    #[test]
    fn bernstein_stable_at_large_degree() {
        let n = 200_000;
        let f = |x: f64| (x - 1.0 / 3.0).abs();
        let b = BernsteinPoly::from_samples(
            (0..=n).map(|k| f(k as f64 / n as f64)).collect(),
        );
        // from_samples enforces the degree ceiling; fit through the guard.
        assert!(b.is_ok());
        let b = b.unwrap();
        for &x in &[0.05, 1.0 / 3.0, 0.77] {
            let err = (b.eval(x) - f(x)).abs();
            assert!(err < 2.0e-3, "x={x} err={err}");
            assert!(b.eval(x).is_finite());
        }
    }

    #[test]
    fn lipschitz_majorant_sandwich() {
        let f = |x: f64| (x - 0.4).abs();
        let eps = 0.05;
        let (b, n, shift) = lipschitz_majorant(f, eps).unwrap();
        assert_eq!(n, 1600);
        assert!((shift - 0.0125).abs() < 1e-12);
        for i in 0..=5000 {
            let x = i as f64 / 5000.0;
            let v = b.eval(x);
            assert!(v >= f(x) - 1e-12, "majorant fails at {x}");
            assert!(v <= f(x) + eps, "excess above eps at {x}");
        }
    }

    #[test]
    fn profile_shape() {
        for &p in &[1.0, 1.5, 2.0, 4.0] {
            assert!((f_profile(p, 0.0) - 1.0).abs() < 1e-15);
            let end = 2f64.powf(-1.0 / p);
            assert!((f_profile(p, 1.0) - end).abs() < 1e-15);
            // 1-Lipschitz and decreasing.
            let mut prev = f_profile(p, 0.0);
            for i in 1..=1000 {
                let t = i as f64 / 1000.0;
                let v = f_profile(p, t);
                assert!(v <= prev + 1e-15);
                assert!((prev - v) <= 1.0 / 1000.0 + 1e-9, "p={p} t={t}");
                prev = v;
            }
        }
    }

    #[test]
    fn profile_majorant_ratio_control() {
        let p = 2.0;
        let eps = 0.1;
        let (w, _, _) = profile_majorant(p, eps).unwrap();
        for i in 0..=4000 {
            let y = i as f64 / 4000.0;
            let f = f_profile(p, y);
            let v = w.eval(y);
            assert!(v >= f - 1e-12);
            assert!(v <= (1.0 + eps) * f + 1e-12);
        }
    }

    #[test]
    fn power_majorant_contracts() {
        let w = power_majorant(2.0, 0.999, 1 << 13).unwrap();
        // Envelope: mean X^(p-1) / (mean X^p)^((p-1)/p) = 1/sqrt(1.5).
        let envelope = 1.0 / 1.5f64.sqrt();
        assert!(w.lambda1 < 0.97, "lambda1 = {}", w.lambda1);
        assert!(w.lambda1 > envelope - 1e-3, "lambda1 = {}", w.lambda1);
        // Majorant property spot check; the shift is certified on the
        // deficit grid, so allow interpolation-scale slack between nodes.
        for i in 0..=2000 {
            let x = 2.0 * i as f64 / 2000.0;
            assert!(w.eval(x) >= x.sqrt() - 1e-5, "x={x}");
        }
    }

    #[test]
    fn power_majorant_budget_error() {
        let err = power_majorant(1.0 + 1e-9, 0.5, 128).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
    }

    #[test]
    fn lambda2_and_admissible_eps() {
        let l2 = lambda2(2.0, 0.9, 0.0625);
        assert!((l2 - (1.0625 * (0.9375f64).powf(-0.5) * 0.9)).abs() < 1e-12);
        let eps = admissible_eps(2.0, 0.9).unwrap();
        assert_eq!(eps, 0.0625);
        assert!(lambda2(2.0, 0.9, eps) < 1.0);
        assert!(admissible_eps(2.0, 1.2).is_err());
    }

    #[test]
    fn weight_majorant_sandwich() {
        let seq = LacunarySeq::make(3, Ratio::from_integer(3), 2, None).unwrap();
        let spec = WeightSpec::new(
            1,
            2,
            2.0,
            vec![WeightChoice::HalfPhi, WeightChoice::OneMinusHalfPhi],
        )
        .unwrap();
        let h = WeightMajorant::build(&spec, &seq).unwrap();
        let (lower, upper) = h.sandwich_margins(&spec, &seq, 4096);
        assert!(lower >= -1e-10, "h^p dips below g by {lower}");
        assert!(upper <= 1e-10, "h^p exceeds 2g by {upper}");
        assert!(h.degree_bound > 0);
        assert_eq!(h.epsilons.len(), 1);
    }
}
