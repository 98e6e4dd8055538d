//! Sparse trigonometric polynomials on the circle.
//!
//! Terms live in a frequency-keyed map, so every operation costs in the
//! number of stored terms and never in the magnitude of the frequencies.
//! Coefficients are either exact complex dyadic rationals or f64 complex
//! numbers; a polynomial is homogeneous in one mode, and any operation that
//! mixes modes promotes the result to float.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::{ComplexDyadic, Dyadic};
use crate::error::{Error, Result};

/// Default cap on term-pair products in one multiplication.
pub const DEFAULT_PAIR_BUDGET: u64 = 1 << 26;

/// Coefficient view: exact dyadic or double precision, mode-tagged.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact(ComplexDyadic),
    Float(Complex64),
}

impl Coefficient {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coefficient::Exact(z) => Complex64::new(z.re.to_f64(), z.im.to_f64()),
            Coefficient::Float(z) => *z,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(z) => z.is_zero(),
            Coefficient::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }
}

/// Internal coefficient arithmetic shared by the exact and float stores.
trait Ring: Clone {
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Ring for ComplexDyadic {
    fn add(&self, rhs: &Self) -> Self {
        ComplexDyadic::add(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        ComplexDyadic::mul(self, rhs)
    }
    fn is_zero(&self) -> bool {
        ComplexDyadic::is_zero(self)
    }
}

impl Ring for Complex64 {
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

fn add_maps<C: Ring>(a: &BTreeMap<i64, C>, b: &BTreeMap<i64, C>) -> BTreeMap<i64, C> {
    let mut out = a.clone();
    for (n, c) in b {
        let merged = match out.get(n) {
            Some(prev) => prev.add(c),
            None => c.clone(),
        };
        if merged.is_zero() {
            out.remove(n);
        } else {
            out.insert(*n, merged);
        }
    }
    out
}

fn mul_maps<C: Ring>(
    a: &BTreeMap<i64, C>,
    b: &BTreeMap<i64, C>,
    budget: u64,
) -> Result<BTreeMap<i64, C>> {
    let pairs = a.len() as u64 * b.len() as u64;
    if pairs > budget {
        return Err(Error::Budget(format!(
            "{pairs} term pairs exceed the multiplication budget {budget}"
        )));
    }
    let mut out: BTreeMap<i64, C> = BTreeMap::new();
    for (n, cn) in a {
        for (m, cm) in b {
            let freq = n
                .checked_add(*m)
                .ok_or_else(|| Error::Overflow("frequency sum in product".into()))?;
            let prod = cn.mul(cm);
            if prod.is_zero() {
                continue;
            }
            let merged = match out.get(&freq) {
                Some(prev) => prev.add(&prod),
                None => prod,
            };
            if merged.is_zero() {
                out.remove(&freq);
            } else {
                out.insert(freq, merged);
            }
        }
    }
    Ok(out)
}

fn pointwise_maps<C: Ring>(a: &BTreeMap<i64, C>, b: &BTreeMap<i64, C>) -> BTreeMap<i64, C> {
    let mut out = BTreeMap::new();
    for (n, cn) in a {
        if let Some(cm) = b.get(n) {
            let prod = cn.mul(cm);
            if !prod.is_zero() {
                out.insert(*n, prod);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Terms {
    Exact(BTreeMap<i64, ComplexDyadic>),
    Float(BTreeMap<i64, Complex64>),
}

/// Sparse trigonometric polynomial `sum_n c_n e^(i n t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    terms: Terms,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly {
            terms: Terms::Exact(BTreeMap::new()),
        }
    }

    pub fn one() -> Self {
        TrigPoly::constant_dyadic(Dyadic::one())
    }

    pub fn constant_dyadic(c: Dyadic) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, ComplexDyadic::real(c));
        }
        TrigPoly {
            terms: Terms::Exact(terms),
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(0, Complex64::new(c, 0.0));
        }
        TrigPoly {
            terms: Terms::Float(terms),
        }
    }

    /// cos(n t) in exact mode: 1/2 at both +-n.
    pub fn cosine(n: i64) -> Self {
        if n == 0 {
            return TrigPoly::one();
        }
        let half = ComplexDyadic::real(Dyadic::ratio(1, 1));
        let mut terms = BTreeMap::new();
        terms.insert(n, half.clone());
        terms.insert(-n, half);
        TrigPoly {
            terms: Terms::Exact(terms),
        }
    }

    /// cos(n t + phase) in float mode.
    pub fn cosine_shifted(n: i64, phase: f64) -> Self {
        if n == 0 {
            return TrigPoly::constant(phase.cos());
        }
        let mut terms = BTreeMap::new();
        let z = Complex64::new(0.5 * phase.cos(), 0.5 * phase.sin());
        terms.insert(n, z);
        terms.insert(-n, z.conj());
        TrigPoly {
            terms: Terms::Float(terms),
        }
    }

    pub fn from_exact_terms(list: Vec<(i64, ComplexDyadic)>) -> Self {
        let mut terms = BTreeMap::new();
        for (n, c) in list {
            let merged = match terms.get(&n) {
                Some(prev) => ComplexDyadic::add(prev, &c),
                None => c,
            };
            if merged.is_zero() {
                terms.remove(&n);
            } else {
                terms.insert(n, merged);
            }
        }
        TrigPoly {
            terms: Terms::Exact(terms),
        }
    }

    pub fn from_float_terms(list: Vec<(i64, Complex64)>) -> Self {
        let mut terms: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (n, c) in list {
            let merged = match terms.get(&n) {
                Some(prev) => prev + c,
                None => c,
            };
            if Ring::is_zero(&merged) {
                terms.remove(&n);
            } else {
                terms.insert(n, merged);
            }
        }
        TrigPoly {
            terms: Terms::Float(terms),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.terms, Terms::Exact(_))
    }

    pub fn term_count(&self) -> usize {
        match &self.terms {
            Terms::Exact(m) => m.len(),
            Terms::Float(m) => m.len(),
        }
    }

    /// Largest |frequency| with a nonzero coefficient.
    pub fn degree(&self) -> i64 {
        let keys: Box<dyn Iterator<Item = &i64>> = match &self.terms {
            Terms::Exact(m) => Box::new(m.keys()),
            Terms::Float(m) => Box::new(m.keys()),
        };
        keys.map(|n| n.abs()).max().unwrap_or(0)
    }

    pub fn frequencies(&self) -> Vec<i64> {
        match &self.terms {
            Terms::Exact(m) => m.keys().copied().collect(),
            Terms::Float(m) => m.keys().copied().collect(),
        }
    }

    pub fn coeff(&self, n: i64) -> Coefficient {
        match &self.terms {
            Terms::Exact(m) => Coefficient::Exact(
                m.get(&n).cloned().unwrap_or_else(ComplexDyadic::zero),
            ),
            Terms::Float(m) => {
                Coefficient::Float(m.get(&n).copied().unwrap_or(Complex64::new(0.0, 0.0)))
            }
        }
    }

    /// Exact coefficient access; `None` in float mode.
    pub fn coeff_exact(&self, n: i64) -> Option<ComplexDyadic> {
        match &self.terms {
            Terms::Exact(m) => Some(m.get(&n).cloned().unwrap_or_else(ComplexDyadic::zero)),
            Terms::Float(_) => None,
        }
    }

    /// The mean over the circle is the zero coefficient.
    pub fn mean(&self) -> Coefficient {
        self.coeff(0)
    }

    fn to_float_map(&self) -> BTreeMap<i64, Complex64> {
        match &self.terms {
            Terms::Exact(m) => m
                .iter()
                .map(|(n, c)| (*n, Complex64::new(c.re.to_f64(), c.im.to_f64())))
                .collect(),
            Terms::Float(m) => m.clone(),
        }
    }

    /// Promotes to float mode (a no-op on float polynomials).
    pub fn to_float(&self) -> TrigPoly {
        TrigPoly {
            terms: Terms::Float(self.to_float_map()),
        }
    }

    pub fn add(&self, rhs: &TrigPoly) -> TrigPoly {
        match (&self.terms, &rhs.terms) {
            (Terms::Exact(a), Terms::Exact(b)) => TrigPoly {
                terms: Terms::Exact(add_maps(a, b)),
            },
            _ => TrigPoly {
                terms: Terms::Float(add_maps(&self.to_float_map(), &rhs.to_float_map())),
            },
        }
    }

    pub fn neg(&self) -> TrigPoly {
        match &self.terms {
            Terms::Exact(m) => TrigPoly {
                terms: Terms::Exact(m.iter().map(|(n, c)| (*n, c.neg())).collect()),
            },
            Terms::Float(m) => TrigPoly {
                terms: Terms::Float(m.iter().map(|(n, c)| (*n, -c)).collect()),
            },
        }
    }

    pub fn sub(&self, rhs: &TrigPoly) -> TrigPoly {
        self.add(&rhs.neg())
    }

    pub fn scale_dyadic(&self, s: &Dyadic) -> TrigPoly {
        if s.is_zero() {
            return TrigPoly::zero();
        }
        match &self.terms {
            Terms::Exact(m) => {
                let sc = ComplexDyadic::real(s.clone());
                TrigPoly {
                    terms: Terms::Exact(m.iter().map(|(n, c)| (*n, c.mul(&sc))).collect()),
                }
            }
            Terms::Float(m) => {
                let sf = s.to_f64();
                TrigPoly {
                    terms: Terms::Float(m.iter().map(|(n, c)| (*n, c * sf)).collect()),
                }
            }
        }
    }

    /// Scales by an f64 without leaving exact mode: finite doubles are
    /// dyadic rationals, so the conversion is lossless.
    pub fn scale_f64_exact(&self, s: f64) -> Result<TrigPoly> {
        let d = Dyadic::from_f64_exact(s)
            .ok_or_else(|| Error::InvalidArgument(format!("non-finite scale {s}")))?;
        Ok(self.scale_dyadic(&d))
    }

    pub fn multiply(&self, rhs: &TrigPoly) -> Result<TrigPoly> {
        self.multiply_budget(rhs, DEFAULT_PAIR_BUDGET)
    }

    pub fn multiply_budget(&self, rhs: &TrigPoly, budget: u64) -> Result<TrigPoly> {
        Ok(match (&self.terms, &rhs.terms) {
            (Terms::Exact(a), Terms::Exact(b)) => TrigPoly {
                terms: Terms::Exact(mul_maps(a, b, budget)?),
            },
            _ => TrigPoly {
                terms: Terms::Float(mul_maps(
                    &self.to_float_map(),
                    &rhs.to_float_map(),
                    budget,
                )?),
            },
        })
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, k: u32, budget: u64) -> Result<TrigPoly> {
        let mut acc = TrigPoly::one();
        for _ in 0..k {
            acc = acc.multiply_budget(self, budget)?;
        }
        Ok(acc)
    }

    /// Term-wise derivative: c_n -> i n c_n.
    pub fn derivative(&self) -> TrigPoly {
        match &self.terms {
            Terms::Exact(m) => {
                let terms = m
                    .iter()
                    .filter(|(n, _)| **n != 0)
                    .map(|(n, c)| {
                        let nf = Dyadic::from_int(*n);
                        // i*n*(re + i*im) = -n*im + i*n*re
                        (
                            *n,
                            ComplexDyadic::new(&(-c.im.clone()) * &nf, &c.re * &nf),
                        )
                    })
                    .collect();
                TrigPoly {
                    terms: Terms::Exact(terms),
                }
            }
            Terms::Float(m) => {
                let terms = m
                    .iter()
                    .filter(|(n, _)| **n != 0)
                    .map(|(n, c)| (*n, Complex64::new(0.0, *n as f64) * c))
                    .collect();
                TrigPoly {
                    terms: Terms::Float(terms),
                }
            }
        }
    }

    /// Fourier-side convolution: coefficients multiply pointwise on the
    /// intersection of supports.
    pub fn convolve_fourier(&self, rhs: &TrigPoly) -> TrigPoly {
        match (&self.terms, &rhs.terms) {
            (Terms::Exact(a), Terms::Exact(b)) => TrigPoly {
                terms: Terms::Exact(pointwise_maps(a, b)),
            },
            _ => TrigPoly {
                terms: Terms::Float(pointwise_maps(&self.to_float_map(), &rhs.to_float_map())),
            },
        }
    }

    /// Substitutes t -> m t, scaling every frequency.
    pub fn scale_frequency(&self, m: i64) -> Result<TrigPoly> {
        let scale = |n: i64| {
            n.checked_mul(m)
                .ok_or_else(|| Error::Overflow("frequency scale".into()))
        };
        Ok(match &self.terms {
            Terms::Exact(map) => {
                let mut out = BTreeMap::new();
                for (n, c) in map {
                    out.insert(scale(*n)?, c.clone());
                }
                TrigPoly {
                    terms: Terms::Exact(out),
                }
            }
            Terms::Float(map) => {
                let mut out = BTreeMap::new();
                for (n, c) in map {
                    out.insert(scale(*n)?, *c);
                }
                TrigPoly {
                    terms: Terms::Float(out),
                }
            }
        })
    }

    /// coeff(-n) == conj(coeff(n)) for every stored term; exact equality in
    /// both modes, so this is a certificate in dyadic mode and a strict
    /// structural check in float mode.
    pub fn is_real_symmetric(&self) -> bool {
        match &self.terms {
            Terms::Exact(m) => m
                .iter()
                .all(|(n, c)| m.get(&-n).map(|d| *c == d.conj()).unwrap_or(false)),
            Terms::Float(m) => m.iter().all(|(n, c)| {
                m.get(&-n)
                    .map(|d| c.re == d.re && c.im == -d.im)
                    .unwrap_or(false)
            }),
        }
    }

    /// Single-point evaluation. Phases use f64 products n*t, adequate for
    /// desk-scale frequencies; grid paths reduce phases exactly instead.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        match &self.terms {
            Terms::Exact(m) => {
                for (n, c) in m {
                    let (s, co) = (*n as f64 * t).sin_cos();
                    let e = Complex64::new(co, s);
                    acc += Complex64::new(c.re.to_f64(), c.im.to_f64()) * e;
                }
            }
            Terms::Float(m) => {
                for (n, c) in m {
                    let (s, co) = (*n as f64 * t).sin_cos();
                    acc += c * Complex64::new(co, s);
                }
            }
        }
        acc
    }

    /// Real-part evaluation for real-symmetric polynomials.
    pub fn evaluate_real(&self, t: f64) -> f64 {
        self.evaluate(t).re
    }

    /// Plancherel sum of |c_n|^2 in f64 (exact paths live in `moments`).
    pub fn coeff_energy(&self) -> f64 {
        match &self.terms {
            Terms::Exact(m) => m.values().map(|c| c.norm_sq().to_f64()).sum(),
            Terms::Float(m) => m.values().map(|c| c.norm_sqr()).sum(),
        }
    }

    pub(crate) fn exact_terms(&self) -> Option<&BTreeMap<i64, ComplexDyadic>> {
        match &self.terms {
            Terms::Exact(m) => Some(m),
            Terms::Float(_) => None,
        }
    }

}

/// de la Vallee Poussin kernel of order d: coefficient 1 on |n| <= d and a
/// linear taper (2d-|n|)/d on d < |n| < 2d. Degree 2d-1, value 3d at zero.
/// The taper is not dyadic in general, so the kernel is float mode.
pub fn vpoussin_kernel(d: i64) -> Result<TrigPoly> {
    if d < 1 {
        return Err(Error::InvalidArgument(format!("order {d} must be >= 1")));
    }
    let mut list = Vec::new();
    for n in -(2 * d - 1)..=(2 * d - 1) {
        let a = n.abs();
        let c = if a <= d {
            1.0
        } else {
            (2 * d - a) as f64 / d as f64
        };
        list.push((n, Complex64::new(c, 0.0)));
    }
    Ok(TrigPoly::from_float_terms(list))
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TrigPoly[{} terms, deg {}, {}]",
            self.term_count(),
            self.degree(),
            if self.is_exact() { "exact" } else { "float" }
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum PolyWire {
    Exact { terms: Vec<(i64, String, String, u32)> },
    Float { terms: Vec<(i64, f64, f64)> },
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match &self.terms {
            Terms::Exact(m) => PolyWire::Exact {
                terms: m
                    .iter()
                    .map(|(n, c)| {
                        let exp = c.re.log2_den().max(c.im.log2_den());
                        let re = c.re.numerator() << ((exp - c.re.log2_den()) as usize);
                        let im = c.im.numerator() << ((exp - c.im.log2_den()) as usize);
                        (*n, re.to_string(), im.to_string(), exp)
                    })
                    .collect(),
            },
            Terms::Float(m) => PolyWire::Float {
                terms: m.iter().map(|(n, c)| (*n, c.re, c.im)).collect(),
            },
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = PolyWire::deserialize(d)?;
        Ok(match wire {
            PolyWire::Exact { terms } => {
                let mut list = Vec::with_capacity(terms.len());
                for (n, re, im, exp) in terms {
                    let re: num_bigint::BigInt =
                        re.parse().map_err(|_| D::Error::custom("bad numerator"))?;
                    let im: num_bigint::BigInt =
                        im.parse().map_err(|_| D::Error::custom("bad numerator"))?;
                    list.push((
                        n,
                        ComplexDyadic::new(Dyadic::new(re, exp), Dyadic::new(im, exp)),
                    ));
                }
                TrigPoly::from_exact_terms(list)
            }
            PolyWire::Float { terms } => TrigPoly::from_float_terms(
                terms
                    .into_iter()
                    .map(|(n, re, im)| (n, Complex64::new(re, im)))
                    .collect(),
            ),
        })
    }
}

/// Norm on the coefficient space of vector-valued polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ENorm {
    L1,
    L2,
    Linf,
}

impl ENorm {
    pub fn norm(&self, v: &[f64]) -> f64 {
        match self {
            ENorm::L1 => v.iter().map(|x| x.abs()).sum(),
            ENorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            ENorm::Linf => v.iter().fold(0.0, |a, x| a.max(x.abs())),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ENorm::L1 => "l1",
            ENorm::L2 => "l2",
            ENorm::Linf => "linf",
        }
    }
}

impl fmt::Display for ENorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Vector-valued trigonometric polynomial: one real-symmetric coordinate
/// polynomial per dimension, normed by `e_norm` pointwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecTrigPoly {
    coords: Vec<TrigPoly>,
    e_norm: ENorm,
}

impl VecTrigPoly {
    pub fn new(coords: Vec<TrigPoly>, e_norm: ENorm) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        for (i, c) in coords.iter().enumerate() {
            if !c.is_real_symmetric() {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {i} is not real-symmetric"
                )));
            }
        }
        // Shared coefficient mode: promote all if any coordinate is float.
        let coords = if coords.iter().all(TrigPoly::is_exact) {
            coords
        } else {
            coords.iter().map(TrigPoly::to_float).collect()
        };
        Ok(VecTrigPoly { coords, e_norm })
    }

    pub fn scalar(p: TrigPoly) -> Result<Self> {
        VecTrigPoly::new(vec![p], ENorm::L2)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn e_norm(&self) -> ENorm {
        self.e_norm
    }

    pub fn coords(&self) -> &[TrigPoly] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &TrigPoly {
        &self.coords[i]
    }

    pub fn is_exact(&self) -> bool {
        self.coords.iter().all(TrigPoly::is_exact)
    }

    pub fn degree(&self) -> i64 {
        self.coords.iter().map(TrigPoly::degree).max().unwrap_or(0)
    }

    pub fn term_count(&self) -> usize {
        self.coords.iter().map(TrigPoly::term_count).sum()
    }

    pub fn add(&self, rhs: &VecTrigPoly) -> Result<VecTrigPoly> {
        if self.dim() != rhs.dim() {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        VecTrigPoly::new(
            self.coords
                .iter()
                .zip(rhs.coords.iter())
                .map(|(a, b)| a.add(b))
                .collect(),
            self.e_norm,
        )
    }

    /// Pointwise norm ||f(t)||_E.
    pub fn norm_at(&self, t: f64) -> f64 {
        let vals: Vec<f64> = self.coords.iter().map(|c| c.evaluate_real(t)).collect();
        self.e_norm.norm(&vals)
    }
}
