//! Exact dyadic rationals `num / 2^exp` with arbitrary-precision numerators.
//!
//! Riesz products, their integer powers, and every Plancherel sum built from
//! them live inside this ring, so equality checks on those paths are exact
//! bit comparisons rather than float tolerances.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `num / 2^exp`, normalized so `num` is odd or zero (zero has `exp = 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic {
            num: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            num: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// `k / 2^exp` for small k.
    pub fn ratio(k: i64, exp: u32) -> Self {
        Dyadic::new(BigInt::from(k), exp)
    }

    /// Exact conversion: every finite f64 is a dyadic rational.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        // Decompose x = mant * 2^e with integer mant.
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if biased == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let num = BigInt::from(sign) * BigInt::from(mant);
        if e >= 0 {
            Some(Dyadic::new(num << (e as usize), 0))
        } else {
            Some(Dyadic::new(num, (-e) as u32))
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        while self.exp > 0 && (&self.num % 2u32).is_zero() {
            self.num /= 2;
            self.exp -= 1;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn log2_den(&self) -> u32 {
        self.exp
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << (self.exp as usize))
    }

    pub fn to_f64(&self) -> f64 {
        // Scale down large numerators first so the intermediate stays finite.
        let bits = self.num.bits();
        if bits > 900 {
            let shift = (bits - 64) as usize;
            let head = (&self.num >> shift).to_f64().unwrap_or(0.0);
            scale_by_pow2(head, shift as i64 - self.exp as i64)
        } else {
            scale_by_pow2(self.num.to_f64().unwrap_or(0.0), -(self.exp as i64))
        }
    }
}

/// v * 2^e without overflowing intermediates: steps stay in the normal
/// range, so only the final multiplication can round (into the subnormals).
fn scale_by_pow2(v: f64, e: i64) -> f64 {
    let mut out = v;
    let mut e = e;
    while e < -1021 && out != 0.0 {
        out *= 2f64.powi(-1021);
        e += 1021;
    }
    while e > 1023 && out.is_finite() {
        out *= 2f64.powi(1023);
        e -= 1023;
    }
    out * 2f64.powi(e as i32)
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        let a = &self.num << ((exp - self.exp) as usize);
        let b = &rhs.num << ((exp - rhs.exp) as usize);
        Dyadic::new(a + b, exp)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs.clone())
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

/// Complex number with exact dyadic real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexDyadic {
    pub re: Dyadic,
    pub im: Dyadic,
}

impl ComplexDyadic {
    pub fn new(re: Dyadic, im: Dyadic) -> Self {
        ComplexDyadic { re, im }
    }

    pub fn zero() -> Self {
        ComplexDyadic::new(Dyadic::zero(), Dyadic::zero())
    }

    pub fn real(re: Dyadic) -> Self {
        ComplexDyadic::new(re, Dyadic::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ComplexDyadic::new(self.re.clone(), -self.im.clone())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        ComplexDyadic::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        ComplexDyadic::new(
            &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        )
    }

    pub fn neg(&self) -> Self {
        ComplexDyadic::new(-self.re.clone(), -self.im.clone())
    }

    /// |z|^2, exact.
    pub fn norm_sq(&self) -> Dyadic {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }
}

/// Renders a rational as `num/2^k` when the denominator is a power of two,
/// otherwise as `num/den`.
pub fn rational_string(r: &BigRational) -> String {
    let den = r.denom();
    if den.is_one() {
        return format!("{}", r.numer());
    }
    let bits = den.bits();
    if den == &(BigInt::one() << ((bits - 1) as usize)) {
        format!("{}/2^{}", r.numer(), bits - 1)
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_strips_shared_powers_of_two() {
        let d = Dyadic::ratio(4, 3);
        assert_eq!(d, Dyadic::ratio(1, 1));
        assert_eq!(d.to_f64(), 0.5);
    }

    #[test]
    fn zero_normalizes_exponent() {
        let d = Dyadic::ratio(0, 7);
        assert!(d.is_zero());
        assert_eq!(d.log2_den(), 0);
    }

    #[test]
    fn arithmetic_matches_f64_on_small_values() {
        let a = Dyadic::ratio(3, 2); // 3/4
        let b = Dyadic::ratio(-1, 3); // -1/8
        assert_eq!((&a + &b).to_f64(), 0.625);
        assert_eq!((&a * &b).to_f64(), -3.0 / 32.0);
        assert_eq!((&a - &b).to_f64(), 0.875);
    }

    #[test]
    fn f64_round_trip_is_exact() {
        for &x in &[0.5, -0.75, 1.0, 3.5e-12, -123456.789, 2f64.powi(-40)] {
            let d = Dyadic::from_f64_exact(x).unwrap();
            assert_eq!(d.to_f64(), x, "round trip failed for {x}");
        }
        assert!(Dyadic::from_f64_exact(f64::NAN).is_none());
    }

    #[test]
    fn complex_product_expands_correctly() {
        // (1/2 + i/2)(1/2 - i/2) = 1/2
        let z = ComplexDyadic::new(Dyadic::ratio(1, 1), Dyadic::ratio(1, 1));
        let w = z.conj();
        let prod = z.mul(&w);
        assert_eq!(prod.re, Dyadic::ratio(1, 1));
        assert!(prod.im.is_zero());
        assert_eq!(z.norm_sq(), Dyadic::ratio(1, 1));
    }

    #[test]
    fn rational_rendering_prefers_power_of_two_denominators() {
        let r = BigRational::new(BigInt::from(35), BigInt::from(8));
        assert_eq!(rational_string(&r), "35/2^3");
        let r = BigRational::new(BigInt::from(2), BigInt::from(3));
        assert_eq!(rational_string(&r), "2/3");
        let r = BigRational::new(BigInt::from(5), BigInt::from(1));
        assert_eq!(rational_string(&r), "5");
    }
}
