//! Uniform-grid means on the torus with point doubling.
//!
//! For a 2 pi periodic integrand the M point trapezoid rule is the plain mean
//! of the samples, and it annihilates every nonzero frequency except exact
//! multiples of M. Doubling the grid reuses all previous samples through
//! mean_{2M} = (mean_M + mean over the new odd-index points) / 2, so an
//! adaptive run costs the same as its finest grid.
//!
//! Grid points are reduced exactly: for frequency n and index i the phase is
//! 2 pi ((n i) mod M) / M computed in integers, so no precision is lost to
//! large arguments. All reductions over sample buffers use sequential
//! pairwise summation, which keeps results byte-identical across thread
//! counts.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lacunary::LacunarySeq;
use crate::riesz::WeightSpec;
use crate::trigpoly::{ENorm, TrigPoly};

/// Default ceiling on the number of grid points.
pub const DEFAULT_MAX_POINTS: u64 = 1 << 24;

/// Hard ceiling keeping (n mod M) * i inside u64.
const GRID_CEILING: u64 = 1 << 26;

const TAU: f64 = std::f64::consts::TAU;

/// Outcome of an adaptive mean computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub value: f64,
    /// Relative difference between the last two grid levels.
    pub error_estimate: f64,
    pub points: u64,
    pub converged: bool,
}

/// Sequential pairwise summation: deterministic, with error growing only
/// logarithmically in the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// A function sampled on uniform grids t_i = 2 pi i / den.
pub trait TorusGridFn: Sync {
    /// Samples at all indices 0..den, or only the odd ones when refining.
    fn grid_values(&self, den: u64, odd_only: bool) -> Vec<f64>;

    /// Starting grid size; adaptive_mean rounds it up to a power of two.
    fn grid_hint(&self) -> u64 {
        64
    }
}

/// Starting grid for an evaluator whose top frequency is n_max: at least two
/// levels finer than the Nyquist grid so early levels never alias the main
/// spectrum away.
fn hint_for_degree(n_max: i64) -> u64 {
    let wanted = 4 * n_max.unsigned_abs().max(16);
    wanted.next_power_of_two().min(1 << 18)
}

/// Doubles the grid until two successive means agree to rel_tol (relative to
/// max(|mean|, 1e-6)), requiring at least two doublings. Stops short of
/// max_points with converged = false rather than failing.
pub fn adaptive_mean(f: &dyn TorusGridFn, rel_tol: f64, max_points: u64) -> Result<MeanEstimate> {
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "relative tolerance {rel_tol} must be positive"
        )));
    }
    let cap = max_points.min(GRID_CEILING);
    let mut den = f.grid_hint().clamp(16, cap).next_power_of_two().min(cap);
    if !den.is_power_of_two() {
        den = (den / 2).next_power_of_two();
    }
    let mut mean = pairwise_mean(&f.grid_values(den, false));
    let mut rel = f64::INFINITY;
    let mut doublings = 0u32;
    while den.checked_mul(2).is_some_and(|d| d <= cap) {
        den *= 2;
        let odd = f.grid_values(den, true);
        let refined = 0.5 * (mean + pairwise_mean(&odd));
        rel = (refined - mean).abs() / refined.abs().max(1e-6);
        mean = refined;
        doublings += 1;
        if doublings >= 2 && rel <= rel_tol {
            return Ok(MeanEstimate {
                value: mean,
                error_estimate: rel,
                points: den,
                converged: true,
            });
        }
    }
    Ok(MeanEstimate {
        value: mean,
        error_estimate: rel,
        points: den,
        converged: false,
    })
}

fn grid_indices(den: u64, odd_only: bool) -> Vec<u64> {
    if odd_only {
        (0..den / 2).map(|j| 2 * j + 1).collect()
    } else {
        (0..den).collect()
    }
}

/// Wraps a plain closure of the grid point t.
pub struct ClosureGridFn<F: Fn(f64) -> f64 + Sync> {
    f: F,
    hint: u64,
}

impl<F: Fn(f64) -> f64 + Sync> ClosureGridFn<F> {
    pub fn new(f: F, hint: u64) -> Self {
        ClosureGridFn { f, hint }
    }
}

impl<F: Fn(f64) -> f64 + Sync> TorusGridFn for ClosureGridFn<F> {
    fn grid_values(&self, den: u64, odd_only: bool) -> Vec<f64> {
        grid_indices(den, odd_only)
            .into_par_iter()
            .map(|i| (self.f)(TAU * i as f64 / den as f64))
            .collect()
    }

    fn grid_hint(&self) -> u64 {
        self.hint
    }
}

/// Signed exact reduction: phase of frequency n at index i of an M grid,
/// returned in [-pi, pi).
fn reduced_phase(n_mod: u64, i: u64, den: u64) -> f64 {
    let mut r = (n_mod * i) % den;
    let half = den / 2;
    let signed = if r >= half {
        r = den - r;
        -(r as f64)
    } else {
        r as f64
    };
    TAU * signed / den as f64
}

/// Product-form evaluator for f(t) = sum_k v_k prod_{j<=k} (1 + a cos(n_j t + psi_j)).
///
/// Works factor by factor, so a point costs O(N) regardless of the 3^N terms
/// an expansion would carry.
#[derive(Debug, Clone)]
pub struct RieszSumEvaluator {
    modes: Vec<i64>,
    phases: Vec<f64>,
    amplitude: f64,
    weights: Vec<Vec<f64>>,
    dim: usize,
}

impl RieszSumEvaluator {
    /// Plain products: amplitude 1, zero phases.
    pub fn new(seq: &LacunarySeq, weights: &[Vec<f64>]) -> Result<Self> {
        let n_upper = weights.len().saturating_sub(1);
        Self::with_phases(seq, weights, &vec![0.0; n_upper], 1.0)
    }

    pub fn with_phases(
        seq: &LacunarySeq,
        weights: &[Vec<f64>],
        phases: &[f64],
        amplitude: f64,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("need at least v_0".into()));
        }
        let dim = weights[0].len();
        if dim == 0 || weights.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidArgument(
                "coefficient vectors must share a positive dimension".into(),
            ));
        }
        let n_upper = weights.len() - 1;
        if n_upper > seq.len() {
            return Err(Error::InvalidArgument(format!(
                "order {n_upper} exceeds sequence length {}",
                seq.len()
            )));
        }
        if phases.len() < n_upper {
            return Err(Error::InvalidArgument(format!(
                "{} phases provided for {n_upper} factors",
                phases.len()
            )));
        }
        Ok(RieszSumEvaluator {
            modes: seq.modes()[..n_upper].to_vec(),
            phases: phases[..n_upper].to_vec(),
            amplitude,
            weights: weights.to_vec(),
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_upper(&self) -> usize {
        self.modes.len()
    }

    pub fn top_mode(&self) -> i64 {
        self.modes.last().copied().unwrap_or(1)
    }

    /// Coordinates of the sum given cosines[j] = cos(n_j t + psi_j).
    pub fn coords_from_cosines(&self, cosines: &[f64], out: &mut [f64]) {
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = self.weights[0][c];
        }
        let mut prod = 1.0;
        for (k, cos_k) in cosines.iter().enumerate().take(self.modes.len()) {
            prod *= 1.0 + self.amplitude * cos_k;
            let v = &self.weights[k + 1];
            for (c, slot) in out.iter_mut().enumerate() {
                *slot += v[c] * prod;
            }
        }
    }

    pub fn coords_at(&self, t: f64, out: &mut [f64]) {
        let cosines: Vec<f64> = self
            .modes
            .iter()
            .zip(self.phases.iter())
            .map(|(n, psi)| (*n as f64 * t + psi).cos())
            .collect();
        self.coords_from_cosines(&cosines, out);
    }

    pub fn norm_at(&self, t: f64, e_norm: ENorm) -> f64 {
        let mut buf = vec![0.0; self.dim];
        self.coords_at(t, &mut buf);
        e_norm.norm(&buf)
    }
}

/// Grid function ||f(t)||^p g(t) for a product-form sum and an optional
/// density from the weight family.
pub struct NormPowerGridFn<'a> {
    evaluator: &'a RieszSumEvaluator,
    e_norm: ENorm,
    p: f64,
    weight: Option<(&'a WeightSpec, &'a LacunarySeq)>,
}

impl<'a> NormPowerGridFn<'a> {
    pub fn new(
        evaluator: &'a RieszSumEvaluator,
        e_norm: ENorm,
        p: f64,
        weight: Option<(&'a WeightSpec, &'a LacunarySeq)>,
    ) -> Self {
        NormPowerGridFn {
            evaluator,
            e_norm,
            p,
            weight,
        }
    }
}

impl TorusGridFn for NormPowerGridFn<'_> {
    fn grid_values(&self, den: u64, odd_only: bool) -> Vec<f64> {
        let ev = self.evaluator;
        // Frequencies needed: the evaluator's modes, then any extra weight
        // modes (the weight always reads cosines without phases).
        let weight_modes: Vec<i64> = match &self.weight {
            Some((spec, seq)) => seq.modes()[..spec.l].to_vec(),
            None => Vec::new(),
        };
        let ev_mods: Vec<u64> = ev.modes.iter().map(|n| n.unsigned_abs() % den).collect();
        let w_mods: Vec<u64> = weight_modes
            .iter()
            .map(|n| n.unsigned_abs() % den)
            .collect();
        let zero_phases = ev.phases.iter().all(|p| *p == 0.0);
        grid_indices(den, odd_only)
            .into_par_iter()
            .map_init(
                || (vec![0.0; ev_mods.len()], vec![0.0; ev.dim], vec![0.0; w_mods.len()]),
                |(cosines, coords, wcos), i| {
                    for (j, m) in ev_mods.iter().enumerate() {
                        let theta = reduced_phase(*m, i, den);
                        cosines[j] = if zero_phases {
                            theta.cos()
                        } else {
                            (theta + ev.phases[j]).cos()
                        };
                    }
                    ev.coords_from_cosines(cosines, coords);
                    let mut val = self.e_norm.norm(coords).powf(self.p);
                    if let Some((spec, _)) = &self.weight {
                        for (j, m) in w_mods.iter().enumerate() {
                            wcos[j] = reduced_phase(*m, i, den).cos();
                        }
                        val *= spec.eval_from_cosines(wcos);
                    }
                    val
                },
            )
            .collect()
    }

    fn grid_hint(&self) -> u64 {
        let mut top = self.evaluator.top_mode();
        if let Some((spec, seq)) = &self.weight {
            if spec.l > 0 {
                top = top.max(seq.modes()[spec.l - 1]);
            }
        }
        hint_for_degree(top)
    }
}

/// Grid function for an expanded polynomial, one exact reduction per term.
pub struct PolyGridFn {
    terms: Vec<(i64, f64, f64)>,
    hint: u64,
}

impl PolyGridFn {
    pub fn new(poly: &TrigPoly) -> Self {
        let terms: Vec<(i64, f64, f64)> = poly
            .frequencies()
            .into_iter()
            .map(|n| {
                let c = poly.coeff(n).to_complex();
                (n, c.re, c.im)
            })
            .collect();
        let hint = hint_for_degree(poly.degree());
        PolyGridFn { terms, hint }
    }
}

impl TorusGridFn for PolyGridFn {
    fn grid_values(&self, den: u64, odd_only: bool) -> Vec<f64> {
        let mods: Vec<(u64, bool, f64, f64)> = self
            .terms
            .iter()
            .map(|(n, re, im)| (n.unsigned_abs() % den, *n < 0, *re, *im))
            .collect();
        grid_indices(den, odd_only)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for (m, neg, re, im) in &mods {
                    let mut theta = reduced_phase(*m, i, den);
                    if *neg {
                        theta = -theta;
                    }
                    // Re(c e^{i theta}) for c = re + i im.
                    acc += re * theta.cos() - im * theta.sin();
                }
                acc
            })
            .collect()
    }

    fn grid_hint(&self) -> u64 {
        self.hint
    }
}

/// Applies a pointwise map (|.|^p, compositions, ...) on top of another grid
/// function without resampling it.
pub struct MappedGridFn<'a, G: TorusGridFn, F: Fn(f64) -> f64 + Sync> {
    inner: &'a G,
    map: F,
}

impl<'a, G: TorusGridFn, F: Fn(f64) -> f64 + Sync> MappedGridFn<'a, G, F> {
    pub fn new(inner: &'a G, map: F) -> Self {
        MappedGridFn { inner, map }
    }
}

impl<G: TorusGridFn, F: Fn(f64) -> f64 + Sync> TorusGridFn for MappedGridFn<'_, G, F> {
    fn grid_values(&self, den: u64, odd_only: bool) -> Vec<f64> {
        self.inner
            .grid_values(den, odd_only)
            .into_iter()
            .map(&self.map)
            .collect()
    }

    fn grid_hint(&self) -> u64 {
        self.inner.grid_hint()
    }
}

/// Mean of f(s, t) over the product of two circles on a fixed tensor grid.
pub fn torus2_mean<F: Fn(f64, f64) -> f64 + Sync>(f: F, den_s: u64, den_t: u64) -> f64 {
    let rows: Vec<f64> = (0..den_s)
        .into_par_iter()
        .map(|is| {
            let s = TAU * is as f64 / den_s as f64;
            let row: Vec<f64> = (0..den_t)
                .map(|it| f(s, TAU * it as f64 / den_t as f64))
                .collect();
            pairwise_mean(&row)
        })
        .collect();
    pairwise_mean(&rows)
}
