//! Finite Riesz products over lacunary sequences and the polynomial weight
//! family built from them.
//!
//! With ratio floor >= 3 the frequency sums sum(eps_j n_j) are all distinct,
//! so the order-N product expands to exactly 3^N terms and the coefficient
//! at sum(eps_j n_j) is 2^(-support(eps)).

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::lacunary::LacunarySeq;
use crate::trigpoly::{ENorm, TrigPoly, VecTrigPoly, DEFAULT_PAIR_BUDGET};

/// Guard on the factor count before expansion is attempted.
const MAX_FACTORS: usize = 20;

fn check_order(seq: &LacunarySeq, n_upper: usize) -> Result<()> {
    if n_upper > seq.len() {
        return Err(Error::InvalidArgument(format!(
            "order {n_upper} exceeds sequence length {}",
            seq.len()
        )));
    }
    if n_upper > MAX_FACTORS {
        return Err(Error::TooLarge(format!(
            "{n_upper} factors would expand past 3^{MAX_FACTORS} terms"
        )));
    }
    Ok(())
}

/// R_N = prod_{j=1..N} (1 + cos(n_j t)), exact; R_0 is the constant 1.
pub fn riesz_product(seq: &LacunarySeq, n_upper: usize) -> Result<TrigPoly> {
    partial_product(seq, 1, n_upper)
}

/// prod_{j=l..N} (1 + cos(n_j t)) with 1-based inclusive bounds; the empty
/// range (l > N) is the constant 1.
pub fn partial_product(seq: &LacunarySeq, l: usize, n_upper: usize) -> Result<TrigPoly> {
    check_order(seq, n_upper)?;
    if l < 1 {
        return Err(Error::InvalidArgument("factor index is 1-based".into()));
    }
    let mut acc = TrigPoly::one();
    for j in l..=n_upper {
        let factor = TrigPoly::one().add(&TrigPoly::cosine(seq.modes()[j - 1]));
        acc = acc.multiply_budget(&factor, DEFAULT_PAIR_BUDGET)?;
    }
    Ok(acc)
}

/// Phase-shifted product prod_{j=1..N} (1 + cos(n_j t + psi_j)), float mode.
pub fn riesz_shifted(seq: &LacunarySeq, n_upper: usize, psi: &[f64]) -> Result<TrigPoly> {
    check_order(seq, n_upper)?;
    if psi.len() < n_upper {
        return Err(Error::InvalidArgument(format!(
            "{} phases provided for {n_upper} factors",
            psi.len()
        )));
    }
    let mut acc = TrigPoly::one().to_float();
    for (&n, &phase) in seq.modes()[..n_upper].iter().zip(psi) {
        let factor = TrigPoly::constant(1.0).add(&TrigPoly::cosine_shifted(n, phase));
        acc = acc.multiply_budget(&factor, DEFAULT_PAIR_BUDGET)?;
    }
    Ok(acc)
}

/// Order-k bump phi_k(t) = ((1 - cos t)/2)^k, exact; phi_0 is 1.
/// Vanishes to order 2k at t = 0 and equals 1 at t = pi.
pub fn phi_k(k: u32) -> Result<TrigPoly> {
    if k as usize > 2 * MAX_FACTORS {
        return Err(Error::TooLarge(format!("phi order {k}")));
    }
    let base = TrigPoly::constant_dyadic(Dyadic::ratio(1, 1)).sub(
        &TrigPoly::cosine(1).scale_dyadic(&Dyadic::ratio(1, 1)),
    );
    base.pow(k, DEFAULT_PAIR_BUDGET)
}

/// Per-factor choice in the weight family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightChoice {
    #[serde(rename = "ONE")]
    One,
    #[serde(rename = "HALF_PHI")]
    HalfPhi,
    #[serde(rename = "ONE_MINUS_HALF_PHI")]
    OneMinusHalfPhi,
}

impl WeightChoice {
    fn label(&self) -> &'static str {
        match self {
            WeightChoice::One => "1",
            WeightChoice::HalfPhi => "hphi",
            WeightChoice::OneMinusHalfPhi => "1-hphi",
        }
    }
}

/// Density g(t) = prod_{j=1..l} h_j(n_j t) with h_j drawn from
/// {1, phi_k^p / 2, 1 - phi_k^p / 2}; these weights tilt the base measure
/// toward or away from the zero sets of the first l factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub k: u32,
    pub l: usize,
    pub p: f64,
    pub choices: Vec<WeightChoice>,
}

impl WeightSpec {
    pub fn new(k: u32, l: usize, p: f64, choices: Vec<WeightChoice>) -> Result<Self> {
        let spec = WeightSpec { k, l, p, choices };
        spec.validate_shape()?;
        Ok(spec)
    }

    /// The trivial weight g = 1.
    pub fn flat(p: f64) -> Self {
        WeightSpec {
            k: 1,
            l: 0,
            p,
            choices: Vec::new(),
        }
    }

    fn validate_shape(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidArgument("weight order k must be >= 1".into()));
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "weight exponent p = {} must be >= 1",
                self.p
            )));
        }
        if self.choices.len() != self.l {
            return Err(Error::InvalidArgument(format!(
                "{} choices provided for l = {}",
                self.choices.len(),
                self.l
            )));
        }
        Ok(())
    }

    pub fn validate(&self, seq: &LacunarySeq) -> Result<()> {
        self.validate_shape()?;
        if self.l > seq.len() {
            return Err(Error::InvalidArgument(format!(
                "weight uses {} factors but the sequence has {}",
                self.l,
                seq.len()
            )));
        }
        Ok(())
    }

    /// phi_k(u)^p = ((1-cos u)/2)^(k p), evaluated pointwise.
    pub fn phi_pow(&self, u: f64) -> f64 {
        let base = 0.5 * (1.0 - u.cos());
        base.powf(self.k as f64 * self.p)
    }

    fn factor_value(&self, choice: WeightChoice, u: f64) -> f64 {
        match choice {
            WeightChoice::One => 1.0,
            WeightChoice::HalfPhi => 0.5 * self.phi_pow(u),
            WeightChoice::OneMinusHalfPhi => 1.0 - 0.5 * self.phi_pow(u),
        }
    }

    /// g(t), always in [0, 1].
    pub fn eval(&self, seq: &LacunarySeq, t: f64) -> f64 {
        let mut acc = 1.0;
        for (j, choice) in self.choices.iter().enumerate() {
            acc *= self.factor_value(*choice, seq.modes()[j] as f64 * t);
        }
        acc
    }

    /// g given cosines[j] = cos(n_j t) for j < l.
    pub fn eval_from_cosines(&self, cosines: &[f64]) -> f64 {
        let mut acc = 1.0;
        for (j, choice) in self.choices.iter().enumerate() {
            let pp = (0.5 * (1.0 - cosines[j])).powf(self.k as f64 * self.p);
            acc *= match choice {
                WeightChoice::One => 1.0,
                WeightChoice::HalfPhi => 0.5 * pp,
                WeightChoice::OneMinusHalfPhi => 1.0 - 0.5 * pp,
            };
        }
        acc
    }

    /// Exact expansion of the density as a trigonometric polynomial.
    /// Requires k*p integral, since phi_k^p = phi_{k p}.
    pub fn to_trigpoly(&self, seq: &LacunarySeq) -> Result<TrigPoly> {
        self.validate(seq)?;
        let kp = self.k as f64 * self.p;
        if kp.fract() != 0.0 || kp > 2.0 * MAX_FACTORS as f64 {
            return Err(Error::InvalidArgument(format!(
                "exact weight expansion needs small integral k*p, got {kp}"
            )));
        }
        let half_phi = phi_k(kp as u32)?.scale_dyadic(&Dyadic::ratio(1, 1));
        let mut acc = TrigPoly::one();
        for (j, choice) in self.choices.iter().enumerate() {
            let factor = match choice {
                WeightChoice::One => TrigPoly::one(),
                WeightChoice::HalfPhi => half_phi.clone(),
                WeightChoice::OneMinusHalfPhi => TrigPoly::one().sub(&half_phi),
            };
            let factor = factor.scale_frequency(seq.modes()[j])?;
            acc = acc.multiply_budget(&factor, DEFAULT_PAIR_BUDGET)?;
        }
        Ok(acc)
    }

    pub fn describe(&self) -> String {
        let parts: Vec<&str> = self.choices.iter().map(|c| c.label()).collect();
        format!("w[k={},p={},({})]", self.k, self.p, parts.join(","))
    }
}

/// Expands f = sum_{j=0..N} v_j R_j with N = coeffs.len() - 1. The f64
/// coordinates convert losslessly to dyadics, so the expansion stays exact.
pub fn weighted_sum(
    seq: &LacunarySeq,
    coeffs: &[Vec<f64>],
    e_norm: ENorm,
) -> Result<VecTrigPoly> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("need at least v_0".into()));
    }
    let dim = coeffs[0].len();
    if dim == 0 || coeffs.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidArgument(
            "coefficient vectors must share a positive dimension".into(),
        ));
    }
    let n_upper = coeffs.len() - 1;
    check_order(seq, n_upper)?;
    // Build R_0..R_N once, reusing prefixes.
    let mut products = Vec::with_capacity(n_upper + 1);
    let mut acc = TrigPoly::one();
    products.push(acc.clone());
    for j in 1..=n_upper {
        let factor = TrigPoly::one().add(&TrigPoly::cosine(seq.modes()[j - 1]));
        acc = acc.multiply_budget(&factor, DEFAULT_PAIR_BUDGET)?;
        products.push(acc.clone());
    }
    let mut coords = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut sum = TrigPoly::zero();
        for (k, v) in coeffs.iter().enumerate() {
            sum = sum.add(&products[k].scale_f64_exact(v[c])?);
        }
        coords.push(sum);
    }
    VecTrigPoly::new(coords, e_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::ComplexDyadic;
    use crate::lacunary::LacunarySeq;
    use num_rational::Ratio;

    fn seq39_27() -> LacunarySeq {
        LacunarySeq::make(3, Ratio::from_integer(3), 3, None).unwrap()
    }

    #[test]
    fn order_zero_is_one() {
        let seq = seq39_27();
        let r0 = riesz_product(&seq, 0).unwrap();
        assert_eq!(r0, TrigPoly::one());
    }

    #[test]
    fn riesz_term_count_and_dyadic_law() {
        let seq = seq39_27();
        let r2 = riesz_product(&seq, 2).unwrap();
        assert_eq!(r2.term_count(), 9);
        assert_eq!(
            r2.coeff_exact(0).unwrap(),
            ComplexDyadic::real(Dyadic::one())
        );
        // 12 = 3 + 9, support 2: coefficient 1/4.
        assert_eq!(
            r2.coeff_exact(12).unwrap(),
            ComplexDyadic::real(Dyadic::ratio(1, 2))
        );
        assert_eq!(
            r2.coeff_exact(6).unwrap(),
            ComplexDyadic::real(Dyadic::ratio(1, 2))
        );
        assert_eq!(
            r2.coeff_exact(3).unwrap(),
            ComplexDyadic::real(Dyadic::ratio(1, 1))
        );
        // Mean is exactly one.
        assert_eq!(r2.mean().to_complex().re, 1.0);
    }

    #[test]
    fn riesz_nonnegative_on_grid() {
        let seq = seq39_27();
        let r3 = riesz_product(&seq, 3).unwrap();
        for i in 0..512 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 512.0;
            assert!(r3.evaluate_real(t) >= -1e-12);
        }
        // R_N(0) = 2^N.
        assert!((r3.evaluate_real(0.0) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn partial_product_range() {
        let seq = seq39_27();
        let tail = partial_product(&seq, 2, 3).unwrap();
        assert_eq!(tail.term_count(), 9);
        assert_eq!(tail.degree(), 9 + 27);
        let empty = partial_product(&seq, 3, 2).unwrap();
        assert_eq!(empty, TrigPoly::one());
    }

    #[test]
    fn shifted_product_reduces_to_plain_at_zero_phase() {
        let seq = seq39_27();
        let plain = riesz_product(&seq, 2).unwrap();
        let shifted = riesz_shifted(&seq, 2, &[0.0, 0.0]).unwrap();
        for &t in &[0.1, 0.9, 2.7, 5.0] {
            assert!((plain.evaluate_real(t) - shifted.evaluate_real(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_product_matches_pointwise_formula() {
        let seq = seq39_27();
        let psi = [0.7, -1.3, 2.1];
        let poly = riesz_shifted(&seq, 3, &psi).unwrap();
        for &t in &[0.0, 0.33, 1.6, 4.4] {
            let direct: f64 = seq
                .modes()
                .iter()
                .zip(psi.iter())
                .map(|(n, s)| 1.0 + ((*n as f64) * t + s).cos())
                .product();
            assert!((poly.evaluate_real(t) - direct).abs() < 1e-10);
        }
        assert!(poly.is_real_symmetric());
    }

    #[test]
    fn phi_basics() {
        let p1 = phi_k(1).unwrap();
        // (1 - cos t)/2 = 1/2 - e^{it}/4 - e^{-it}/4.
        assert_eq!(
            p1.coeff_exact(0).unwrap(),
            ComplexDyadic::real(Dyadic::ratio(1, 1))
        );
        assert_eq!(
            p1.coeff_exact(1).unwrap(),
            ComplexDyadic::real(Dyadic::ratio(-1, 2))
        );
        for k in 1..=4u32 {
            let pk = phi_k(k).unwrap();
            assert!((pk.evaluate_real(0.0)).abs() < 1e-13, "phi_{k}(0) = 0");
            assert!(
                (pk.evaluate_real(std::f64::consts::PI) - 1.0).abs() < 1e-12,
                "phi_{k}(pi) = 1"
            );
            assert_eq!(pk.degree(), k as i64);
        }
    }

    #[test]
    fn weight_eval_stays_in_unit_interval() {
        let seq = seq39_27();
        let spec = WeightSpec::new(
            2,
            3,
            1.5,
            vec![
                WeightChoice::HalfPhi,
                WeightChoice::One,
                WeightChoice::OneMinusHalfPhi,
            ],
        )
        .unwrap();
        spec.validate(&seq).unwrap();
        for i in 0..257 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 257.0;
            let g = spec.eval(&seq, t);
            assert!((0.0..=1.0).contains(&g), "g({t}) = {g}");
        }
        // The all-ONE spec is identically 1.
        let flat = WeightSpec::new(1, 2, 2.0, vec![WeightChoice::One, WeightChoice::One]).unwrap();
        assert_eq!(flat.eval(&seq, 1.234), 1.0);
    }

    #[test]
    fn weight_expansion_matches_pointwise_eval() {
        let seq = seq39_27();
        let spec = WeightSpec::new(
            1,
            2,
            2.0,
            vec![WeightChoice::HalfPhi, WeightChoice::OneMinusHalfPhi],
        )
        .unwrap();
        let poly = spec.to_trigpoly(&seq).unwrap();
        assert!(poly.is_exact());
        for &t in &[0.2, 1.1, 3.9] {
            assert!((poly.evaluate_real(t) - spec.eval(&seq, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_shape_validation() {
        assert!(WeightSpec::new(0, 0, 2.0, vec![]).is_err());
        assert!(WeightSpec::new(1, 2, 2.0, vec![WeightChoice::One]).is_err());
        assert!(WeightSpec::new(1, 0, 0.5, vec![]).is_err());
    }

    #[test]
    fn weighted_sum_expansion() {
        // 1 - R_1 + R_2 over (3, 9) collapses to
        // 1 + cos 9t + cos 3t cos 9t: frequencies {0, +-6, +-9, +-12}.
        let seq = LacunarySeq::make(3, Ratio::from_integer(3), 2, None).unwrap();
        let f = weighted_sum(&seq, &[vec![1.0], vec![-1.0], vec![1.0]], ENorm::L2).unwrap();
        let poly = f.coord(0);
        assert!(poly.is_exact());
        assert_eq!(poly.term_count(), 7);
        assert_eq!(
            poly.coeff_exact(0).unwrap(),
            ComplexDyadic::real(Dyadic::one())
        );
        assert_eq!(
            poly.coeff_exact(9).unwrap(),
            ComplexDyadic::real(Dyadic::ratio(1, 1))
        );
        assert_eq!(
            poly.coeff_exact(6).unwrap(),
            ComplexDyadic::real(Dyadic::ratio(1, 2))
        );
        assert_eq!(
            poly.coeff_exact(12).unwrap(),
            ComplexDyadic::real(Dyadic::ratio(1, 2))
        );
        assert!(poly.coeff_exact(3).unwrap().is_zero());
        // Cross-check the whole expansion pointwise.
        for &t in &[0.15f64, 0.8, 2.3] {
            let expect = 1.0 + (9.0 * t).cos() + (3.0 * t).cos() * (9.0 * t).cos();
            assert!((poly.evaluate_real(t) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_sum_validates_shapes() {
        let seq = seq39_27();
        assert!(weighted_sum(&seq, &[], ENorm::L2).is_err());
        assert!(weighted_sum(&seq, &[vec![1.0], vec![1.0, 2.0]], ENorm::L2).is_err());
        assert!(weighted_sum(
            &seq,
            &[vec![1.0], vec![1.0], vec![1.0], vec![1.0], vec![1.0]],
            ENorm::L2
        )
        .is_err());
    }
}
