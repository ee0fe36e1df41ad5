//! Time-dependent coefficients: piecewise polynomials with Dirac deltas,
//! Friedrichs mollifiers, regularisation schedules `ω(ε)` and the
//! regularised nets `a_ε = a ∗ ψ_{ω(ε)}`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::quadrature::gauss_legendre_20;

/// Which one-sided limit to take at a discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A real coefficient of time with a first derivative.
///
/// `breakpoints` lists interior times where the value or its derivative may
/// jump or change sharply; integrators step onto them exactly.
pub trait TimeCoefficient: Send + Sync + fmt::Debug {
    fn value(&self, t: f64, side: Side) -> f64;
    fn derivative(&self, t: f64, side: Side) -> f64;
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Polynomial on `[t_start, t_end]` in the local variable `t − t_start`,
/// coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySegment {
    pub t_start: f64,
    pub t_end: f64,
    pub poly_coeffs: Vec<f64>,
}

impl PolySegment {
    pub fn constant(t_start: f64, t_end: f64, c: f64) -> Self {
        Self {
            t_start,
            t_end,
            poly_coeffs: vec![c],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let tau = t - self.t_start;
        self.poly_coeffs.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        let tau = t - self.t_start;
        self.poly_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * tau + k as f64 * c)
    }

    /// Minimum over the segment, by dense sampling (endpoints included).
    fn sampled_min(&self) -> f64 {
        const SAMPLES: usize = 256;
        (0..=SAMPLES)
            .map(|i| self.eval(self.t_start + (self.t_end - self.t_start) * i as f64 / SAMPLES as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Point mass `weight · δ_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub t: f64,
    pub weight: f64,
}

/// A coefficient distribution on `[0, T]`: a piecewise polynomial (jumps allowed
/// at segment boundaries) plus finitely many Dirac deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDistribution {
    horizon: f64,
    segments: Vec<PolySegment>,
    deltas: Vec<Delta>,
    lower_bound: Option<f64>,
}

impl TimeDistribution {
    /// Validates and builds a distribution.
    ///
    /// Segments must tile `[0, T]` contiguously (an empty list means smooth part 0).
    /// Deltas must lie in the open interval `(0, T)`. When `lower_bound = Some(a₀)`
    /// every segment must stay `≥ a₀` and every delta weight `≥ 0`.
    pub fn new(
        horizon: f64,
        segments: Vec<PolySegment>,
        mut deltas: Vec<Delta>,
        lower_bound: Option<f64>,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon T must be positive, got {horizon}")));
        }
        if !segments.is_empty() {
            if segments[0].t_start != 0.0 {
                return Err(Error::InvalidInput("first segment must start at t = 0".into()));
            }
            if segments.last().unwrap().t_end != horizon {
                return Err(Error::InvalidInput(format!("last segment must end at T = {horizon}")));
            }
            for (i, s) in segments.iter().enumerate() {
                if !(s.t_start < s.t_end) {
                    return Err(Error::InvalidInput(format!(
                        "segment {i}: breakpoints must be strictly increasing ({} >= {})",
                        s.t_start, s.t_end
                    )));
                }
                if s.poly_coeffs.is_empty() || s.poly_coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput(format!("segment {i}: coefficients must be finite and nonempty")));
                }
                if i + 1 < segments.len() && segments[i + 1].t_start != s.t_end {
                    return Err(Error::InvalidInput(format!("segments {i} and {} are not contiguous", i + 1)));
                }
            }
        }
        for d in &deltas {
            if !(d.t > 0.0 && d.t < horizon) {
                return Err(Error::InvalidInput(format!(
                    "delta at t = {} must lie in the open interval (0, {horizon})",
                    d.t
                )));
            }
            if !d.weight.is_finite() {
                return Err(Error::InvalidInput("delta weight must be finite".into()));
            }
        }
        deltas.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        let dist = Self {
            horizon,
            segments,
            deltas,
            lower_bound,
        };
        if let Some(a0) = lower_bound {
            dist.check_lower_bound(a0)?;
        }
        Ok(dist)
    }

    fn check_lower_bound(&self, a0: f64) -> Result<()> {
        let smooth_min = if self.segments.is_empty() {
            0.0
        } else {
            self.segments.iter().map(PolySegment::sampled_min).fold(f64::INFINITY, f64::min)
        };
        if smooth_min < a0 {
            return Err(Error::InvalidInput(format!(
                "smooth part drops to {smooth_min} below the declared lower bound {a0}"
            )));
        }
        if let Some(d) = self.deltas.iter().find(|d| d.weight < 0.0) {
            return Err(Error::InvalidInput(format!(
                "delta at t = {} has negative weight {} under a lower bound",
                d.t, d.weight
            )));
        }
        Ok(())
    }

    /// Constant `c` on `[0, T]`.
    pub fn constant(horizon: f64, c: f64) -> Result<Self> {
        Self::new(horizon, vec![PolySegment::constant(0.0, horizon, c)], vec![], None)
    }

    /// Step function `left` on `[0, t_jump)`, `right` on `[t_jump, T]`.
    pub fn step(horizon: f64, t_jump: f64, left: f64, right: f64) -> Result<Self> {
        Self::new(
            horizon,
            vec![
                PolySegment::constant(0.0, t_jump, left),
                PolySegment::constant(t_jump, horizon, right),
            ],
            vec![],
            None,
        )
    }

    /// Pure point mass `weight · δ_{t0}` with zero smooth part.
    pub fn delta(horizon: f64, t0: f64, weight: f64) -> Result<Self> {
        Self::new(horizon, vec![], vec![Delta { t: t0, weight }], None)
    }

    /// Piecewise polynomial interpolant of `f` at Chebyshev points: `pieces`
    /// equal segments of the given degree.
    pub fn from_fn<F: Fn(f64) -> f64>(horizon: f64, pieces: usize, degree: usize, f: F) -> Result<Self> {
        if pieces == 0 {
            return Err(Error::InvalidInput("need at least one segment".into()));
        }
        let h = horizon / pieces as f64;
        let m = degree + 1;
        // Vandermonde in u = τ / h ∈ [0, 1] at Chebyshev points.
        let us: Vec<f64> = (0..m)
            .map(|k| 0.5 - 0.5 * (std::f64::consts::PI * (2 * k + 1) as f64 / (2 * m) as f64).cos())
            .collect();
        let vander = DMatrix::from_fn(m, m, |i, j| us[i].powi(j as i32));
        let lu = vander.lu();
        let mut segments = Vec::with_capacity(pieces);
        for p in 0..pieces {
            let t0 = h * p as f64;
            let t1 = if p + 1 == pieces { horizon } else { t0 + h };
            let rhs = DVector::from_iterator(m, us.iter().map(|u| f(t0 + u * (t1 - t0))));
            let sol = lu
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidInput("interpolation system is singular".into()))?;
            let len = t1 - t0;
            let poly_coeffs = sol.iter().enumerate().map(|(k, c)| c / len.powi(k as i32)).collect();
            segments.push(PolySegment {
                t_start: t0,
                t_end: t1,
                poly_coeffs,
            });
        }
        Self::new(horizon, segments, vec![], None)
    }

    /// Adds the deltas and smooth part of `other` (breakpoints are merged).
    pub fn plus(&self, other: &TimeDistribution) -> Result<Self> {
        if self.horizon != other.horizon {
            return Err(Error::InvalidInput("distributions have different horizons".into()));
        }
        let mut cuts: Vec<f64> = self
            .segments
            .iter()
            .chain(&other.segments)
            .flat_map(|s| [s.t_start, s.t_end])
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut segments = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let mut coeffs = vec![0.0];
            for src in [self, other] {
                if let Some(seg) = src.segment_at(mid) {
                    let shifted = shift_poly(&seg.poly_coeffs, lo - seg.t_start);
                    if shifted.len() > coeffs.len() {
                        coeffs.resize(shifted.len(), 0.0);
                    }
                    for (c, s) in coeffs.iter_mut().zip(&shifted) {
                        *c += s;
                    }
                }
            }
            segments.push(PolySegment {
                t_start: lo,
                t_end: hi,
                poly_coeffs: coeffs,
            });
        }
        let deltas = self.deltas.iter().chain(&other.deltas).copied().collect();
        let lower_bound = match (self.lower_bound, other.lower_bound) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Self::new(self.horizon, segments, deltas, lower_bound)
    }

    /// Declares `self ≥ a₀` and validates it.
    pub fn with_lower_bound(mut self, a0: f64) -> Result<Self> {
        self.check_lower_bound(a0)?;
        self.lower_bound = Some(a0);
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[PolySegment] {
        &self.segments
    }

    pub fn deltas(&self) -> &[Delta] {
        &self.deltas
    }

    pub fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }

    pub fn has_deltas(&self) -> bool {
        !self.deltas.is_empty()
    }

    /// Smooth part `≥ 0` and delta weights `≥ 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.segments.iter().all(|s| s.sampled_min() >= 0.0) && self.deltas.iter().all(|d| d.weight >= 0.0)
    }

    fn segment_at(&self, t: f64) -> Option<&PolySegment> {
        self.segments.iter().find(|s| s.t_start <= t && t <= s.t_end)
    }

    fn segment_index(&self, t: f64, side: Side) -> Option<usize> {
        if self.segments.is_empty() {
            return None;
        }
        let idx = self.segments.partition_point(|s| match side {
            Side::Right => s.t_end <= t,
            Side::Left => s.t_end < t,
        });
        Some(idx.min(self.segments.len() - 1))
    }

    /// Smooth part, extended constantly outside `[0, T]`.
    pub fn smooth_value(&self, t: f64, side: Side) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        match self.segment_index(t, side) {
            Some(i) => self.segments[i].eval(t),
            None => 0.0,
        }
    }

    /// Derivative of the smooth part (zero outside `[0, T]`).
    pub fn smooth_derivative(&self, t: f64, side: Side) -> f64 {
        if t < 0.0 || t > self.horizon {
            return 0.0;
        }
        match self.segment_index(t, side) {
            Some(i) => self.segments[i].eval_derivative(t),
            None => 0.0,
        }
    }

    /// Segment boundaries strictly inside `(0, T)`.
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.t_start).collect()
    }

    /// All boundaries of the smooth part, including `0` and `T`.
    fn all_breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.t_start).collect();
        if let Some(last) = self.segments.last() {
            v.push(last.t_end);
        }
        v
    }

    /// The coefficient as a classical (delta-free) function of time.
    pub fn classical(&self) -> Result<ClassicalCoefficient> {
        if self.has_deltas() {
            return Err(Error::Precondition(format!(
                "classical evaluation needs a delta-free coefficient; found {} delta(s)",
                self.deltas.len()
            )));
        }
        Ok(ClassicalCoefficient(Arc::new(self.clone())))
    }
}

/// Coefficients of `p(τ + shift)` given those of `p(τ)`.
fn shift_poly(coeffs: &[f64], shift: f64) -> Vec<f64> {
    let n = coeffs.len();
    let mut out = vec![0.0; n];
    for (k, c) in coeffs.iter().enumerate() {
        // (τ + s)^k = Σ_i C(k,i) s^{k−i} τ^i
        let mut binom = 1.0;
        for i in (0..=k).rev() {
            out[i] += c * binom * shift.powi((k - i) as i32);
            binom = binom * i as f64 / (k - i + 1) as f64;
        }
    }
    out
}

/// A delta-free [`TimeDistribution`] evaluated directly.
#[derive(Debug, Clone)]
pub struct ClassicalCoefficient(Arc<TimeDistribution>);

impl ClassicalCoefficient {
    pub fn distribution(&self) -> &TimeDistribution {
        &self.0
    }
}

impl TimeCoefficient for ClassicalCoefficient {
    fn value(&self, t: f64, side: Side) -> f64 {
        self.0.smooth_value(t, side)
    }

    fn derivative(&self, t: f64, side: Side) -> f64 {
        self.0.smooth_derivative(t, side)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.0.interior_breakpoints()
    }
}

/// Coefficient given by closures, for tests and manufactured problems.
pub struct FnCoefficient {
    value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FnCoefficient {
    pub fn new<V, D>(value: V, derivative: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Box::new(value),
            derivative: Box::new(derivative),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0)
    }
}

impl fmt::Debug for FnCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnCoefficient(..)")
    }
}

impl TimeCoefficient for FnCoefficient {
    fn value(&self, t: f64, _side: Side) -> f64 {
        (self.value)(t)
    }

    fn derivative(&self, t: f64, _side: Side) -> f64 {
        (self.derivative)(t)
    }
}

fn raw_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn raw_bump_derivative(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - s * s;
        raw_bump(s) * (-2.0 * s / (d * d))
    }
}

/// `∫_{-1}^{1} exp(−1/(1−s²)) ds`.
fn raw_bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| gauss_legendre_20().integrate_composite(-1.0, 1.0, 64, raw_bump))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MollifierShape {
    /// `c · exp(−1/(1−t²))` on `(−1, 1)`.
    StandardBump,
    /// The standard bump rescaled onto `[offset − (1−|offset|), offset + (1−|offset|)] ⊂ [−1, 1]`.
    ShiftedBump { offset: f64 },
}

/// Friedrichs mollifier: smooth, nonnegative, supported in `[−1, 1]`, unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    shape: MollifierShape,
    center: f64,
    half_width: f64,
    normalization: f64,
}

impl Mollifier {
    pub fn standard() -> Self {
        Self {
            shape: MollifierShape::StandardBump,
            center: 0.0,
            half_width: 1.0,
            normalization: 1.0 / raw_bump_mass(),
        }
    }

    pub fn shifted(offset: f64) -> Result<Self> {
        if !(offset.abs() < 1.0) {
            return Err(Error::InvalidInput(format!("bump offset must lie in (-1, 1), got {offset}")));
        }
        let half_width = 1.0 - offset.abs();
        Ok(Self {
            shape: MollifierShape::ShiftedBump { offset },
            center: offset,
            half_width,
            normalization: 1.0 / (raw_bump_mass() * half_width),
        })
    }

    pub fn from_shape(shape: MollifierShape) -> Result<Self> {
        match shape {
            MollifierShape::StandardBump => Ok(Self::standard()),
            MollifierShape::ShiftedBump { offset } => Self::shifted(offset),
        }
    }

    pub fn shape(&self) -> MollifierShape {
        self.shape
    }

    /// Normalization constant `c` multiplying the raw bump.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `[lo, hi]` containing the support.
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.normalization * raw_bump((t - self.center) / self.half_width)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.normalization * raw_bump_derivative((t - self.center) / self.half_width) / self.half_width
    }

    /// `Ψ(t) = ∫_{−∞}^{t} ψ`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let s = (t - self.center) / self.half_width;
        let panels = ((s + 1.0) * 32.0).ceil().max(1.0) as usize;
        let v = gauss_legendre_20().integrate_composite(-1.0, s, panels, raw_bump) / raw_bump_mass();
        v.clamp(0.0, 1.0)
    }

    /// `sup |ψ'|` over a fine sampling of the support.
    pub fn derivative_sup(&self) -> f64 {
        let (lo, hi) = self.support();
        (0..=4000)
            .map(|i| self.derivative(lo + (hi - lo) * i as f64 / 4000.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Regularisation schedule `ε ↦ ω(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OmegaSchedule {
    /// `ω(ε) = 1 / log(1/ε)`.
    Log,
    /// `ω(ε) = ε^p`.
    Power(f64),
    /// `ω(ε) = c`, for tests only.
    Constant(f64),
}

impl OmegaSchedule {
    pub fn omega(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        let w = match *self {
            OmegaSchedule::Log => 1.0 / (1.0 / eps).ln(),
            OmegaSchedule::Power(p) => {
                if !(p > 0.0) {
                    return Err(Error::Domain(format!("power schedule exponent must be positive, got {p}")));
                }
                eps.powf(p)
            }
            OmegaSchedule::Constant(c) => {
                if !(c > 0.0) {
                    return Err(Error::Domain(format!("constant schedule must be positive, got {c}")));
                }
                c
            }
        };
        if w > 1.0 {
            log::warn!("omega({eps}) = {w} exceeds 1; the schedule is outside its asymptotic regime");
        }
        Ok(w)
    }
}

impl fmt::Display for OmegaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaSchedule::Log => f.write_str("log"),
            OmegaSchedule::Power(p) => write!(f, "power:{p}"),
            OmegaSchedule::Constant(c) => write!(f, "constant:{c}"),
        }
    }
}

impl std::str::FromStr for OmegaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("schedule must be 'log', 'power:<p>' or 'constant:<c>', got '{s}'"));
        if s == "log" {
            return Ok(OmegaSchedule::Log);
        }
        let (kind, val) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = val.parse().map_err(|_| bad())?;
        match kind {
            "power" if v > 0.0 => Ok(OmegaSchedule::Power(v)),
            "constant" if v > 0.0 => Ok(OmegaSchedule::Constant(v)),
            _ => Err(bad()),
        }
    }
}

/// `a_ω = a ∗ ψ_ω` with `ψ_ω(t) = ω⁻¹ ψ(t/ω)`.
#[derive(Debug, Clone)]
pub struct RegularizedCoefficient {
    source: Arc<TimeDistribution>,
    mollifier: Mollifier,
    width: f64,
}

/// Regularises `dist` with `ψ_w`.
pub fn regularize(dist: &TimeDistribution, psi: Mollifier, w: f64) -> Result<RegularizedCoefficient> {
    RegularizedCoefficient::new(Arc::new(dist.clone()), psi, w)
}

impl RegularizedCoefficient {
    pub fn new(source: Arc<TimeDistribution>, mollifier: Mollifier, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!("mollifier width must be positive, got {width}")));
        }
        Ok(Self {
            source,
            mollifier,
            width,
        })
    }

    pub fn source(&self) -> &TimeDistribution {
        &self.source
    }

    pub fn mollifier(&self) -> Mollifier {
        self.mollifier
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Pieces `(τ_a, τ_b, segment)` of the support of ψ on which `t − wτ` stays in one segment.
    fn pieces(&self, t: f64) -> Vec<(f64, f64, &PolySegment)> {
        let (lo, hi) = self.mollifier.support();
        let w = self.width;
        let mut cuts = vec![lo, hi];
        for b in self.source.all_breakpoints() {
            let tau = (t - b) / w;
            if tau > lo && tau < hi {
                cuts.push(tau);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.windows(2)
            .filter(|c| c[1] > c[0])
            .map(|c| {
                let mid_arg = (t - w * 0.5 * (c[0] + c[1])).clamp(0.0, self.source.horizon);
                let i = self.source.segment_index(mid_arg, Side::Right).unwrap();
                (c[0], c[1], &self.source.segments[i])
            })
            .collect()
    }

    /// Segment value at `t − wτ`, constant outside `[0, T]`.
    fn seg_value(&self, seg: &PolySegment, t: f64, tau: f64) -> f64 {
        seg.eval((t - self.width * tau).clamp(seg.t_start, seg.t_end))
    }

    fn seg_derivative(&self, seg: &PolySegment, t: f64, tau: f64) -> f64 {
        let arg = t - self.width * tau;
        if arg < 0.0 || arg > self.source.horizon {
            0.0
        } else {
            seg.eval_derivative(arg.clamp(seg.t_start, seg.t_end))
        }
    }

    fn panels(&self, a: f64, b: f64) -> usize {
        let (lo, hi) = self.mollifier.support();
        ((b - a) * 16.0 / (hi - lo)).ceil().max(1.0) as usize
    }

    fn smooth_value_part(&self, t: f64) -> f64 {
        if self.source.segments.is_empty() {
            return 0.0;
        }
        let rule = gauss_legendre_20();
        self.pieces(t)
            .into_iter()
            .map(|(a, b, seg)| {
                rule.integrate_composite(a, b, self.panels(a, b), |tau| {
                    self.seg_value(seg, t, tau) * self.mollifier.eval(tau)
                })
            })
            .sum()
    }

    /// `(1/w)∫ a(t − wτ) ψ'(τ) dτ`, integrated by parts on each piece so that
    /// jumps enter through exact boundary terms.
    fn smooth_derivative_part(&self, t: f64) -> f64 {
        if self.source.segments.is_empty() {
            return 0.0;
        }
        let rule = gauss_legendre_20();
        let w = self.width;
        self.pieces(t)
            .into_iter()
            .map(|(a, b, seg)| {
                let boundary = (self.seg_value(seg, t, b) * self.mollifier.eval(b)
                    - self.seg_value(seg, t, a) * self.mollifier.eval(a))
                    / w;
                let interior = if seg.poly_coeffs.len() > 1 {
                    rule.integrate_composite(a, b, self.panels(a, b), |tau| {
                        self.seg_derivative(seg, t, tau) * self.mollifier.eval(tau)
                    })
                } else {
                    0.0
                };
                boundary + interior
            })
            .sum()
    }

    pub fn value(&self, t: f64) -> f64 {
        let w = self.width;
        let point: f64 = self
            .source
            .deltas
            .iter()
            .map(|d| d.weight * self.mollifier.eval((t - d.t) / w) / w)
            .sum();
        point + self.smooth_value_part(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let w = self.width;
        let point: f64 = self
            .source
            .deltas
            .iter()
            .map(|d| d.weight * self.mollifier.derivative((t - d.t) / w) / (w * w))
            .sum();
        point + self.smooth_derivative_part(t)
    }

    /// Times where regularised deltas and jumps begin, peak and end.
    pub fn feature_points(&self) -> Vec<f64> {
        let (lo, hi) = self.mollifier.support();
        let mut pts: Vec<f64> = self
            .source
            .deltas
            .iter()
            .map(|d| d.t)
            .chain(self.source.interior_breakpoints())
            .flat_map(|c| [c + self.width * lo, c, c + self.width * hi])
            .filter(|t| *t > 0.0 && *t < self.source.horizon)
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }
}

impl TimeCoefficient for RegularizedCoefficient {
    fn value(&self, t: f64, _side: Side) -> f64 {
        RegularizedCoefficient::value(self, t)
    }

    fn derivative(&self, t: f64, _side: Side) -> f64 {
        RegularizedCoefficient::derivative(self, t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.feature_points()
    }
}

/// Relative allowance for rounding in [`verify_lower_bound`].
pub const LOWER_BOUND_ROUNDING: f64 = 1e-12;

/// Checks `a_ε(t) ≥ a₀` at every sample.
///
/// Smooth parts are extended constantly outside `[0, T]`, so no mollifier
/// mass is lost at the boundary and the bound carries over with no correction.
pub fn verify_lower_bound(reg: &RegularizedCoefficient, a0: f64, t_samples: &[f64]) -> bool {
    let threshold = a0 - LOWER_BOUND_ROUNDING * a0.abs();
    t_samples.iter().all(|&t| reg.value(t) >= threshold)
}

/// Fitted growth exponent of `sup_t |∂_t^k a_ε|` against `1/ω(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeGrowth {
    pub k: u32,
    pub exponent: f64,
    pub rms_residual: f64,
}

/// Sample times on `[0, T]` that resolve the regularised features of `dist` at width `w`.
pub fn sup_sample_times(dist: &TimeDistribution, psi: &Mollifier, w: f64) -> Vec<f64> {
    const UNIFORM: usize = 2000;
    const LOCAL: usize = 400;
    let t_end = dist.horizon();
    let (lo, hi) = psi.support();
    let mut ts: Vec<f64> = (0..=UNIFORM).map(|i| t_end * i as f64 / UNIFORM as f64).collect();
    let centers = dist.deltas().iter().map(|d| d.t).chain(dist.interior_breakpoints());
    for c in centers {
        for i in 0..=LOCAL {
            let t = c + w * (lo + (hi - lo) * i as f64 / LOCAL as f64);
            if (0.0..=t_end).contains(&t) {
                ts.push(t);
            }
        }
    }
    ts
}

/// For each `k ≤ k_max` fits the slope of `log sup_t |∂^k a_ε|` against `log(1/ω(ε))`.
pub fn moderateness_bound_estimate(
    dist: &TimeDistribution,
    psi: Mollifier,
    schedule: OmegaSchedule,
    eps_grid: &[f64],
    k_max: u32,
) -> Result<Vec<DerivativeGrowth>> {
    if eps_grid.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "moderateness estimate needs at least 4 epsilon values, got {}",
            eps_grid.len()
        )));
    }
    if k_max > 1 {
        return Err(Error::InvalidInput(
            "coefficient derivatives beyond first order are not evaluated".into(),
        ));
    }
    let source = Arc::new(dist.clone());
    let mut inv_omega = Vec::with_capacity(eps_grid.len());
    let mut sups = vec![Vec::with_capacity(eps_grid.len()); k_max as usize + 1];
    for &eps in eps_grid {
        let w = schedule.omega(eps)?;
        let reg = RegularizedCoefficient::new(source.clone(), psi, w)?;
        let ts = sup_sample_times(dist, &psi, w);
        inv_omega.push((1.0 / w).ln());
        for (k, s) in sups.iter_mut().enumerate() {
            let sup = ts
                .iter()
                .map(|&t| if k == 0 { reg.value(t) } else { reg.derivative(t) }.abs())
                .fold(0.0, f64::max);
            s.push(sup);
        }
    }
    // Derivative sups at rounding level relative to the value scale count as zero.
    let scale = sups[0].iter().copied().fold(0.0, f64::max).max(1.0);
    sups.into_iter()
        .enumerate()
        .map(|(k, mut s)| {
            if s.iter().all(|v| *v <= 1e-12 * scale) {
                s.iter_mut().for_each(|v| *v = 0.0);
            }
            growth_fit(k as u32, &inv_omega, &s)
        })
        .collect()
}

fn growth_fit(k: u32, xs: &[f64], sups: &[f64]) -> Result<DerivativeGrowth> {
    let max = sups.iter().copied().fold(0.0, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min > 0.0 && (max - min) <= 1e-12 * max {
        return Ok(DerivativeGrowth {
            k,
            exponent: 0.0,
            rms_residual: 0.0,
        });
    }
    let ys: Vec<f64> = sups.iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).collect();
    match fit_line(xs, &ys) {
        Ok(fit) => Ok(DerivativeGrowth {
            k,
            exponent: fit.slope,
            rms_residual: fit.rms_residual,
        }),
        Err(Error::DegenerateFit(_)) => Ok(DerivativeGrowth {
            k,
            exponent: 0.0,
            rms_residual: 0.0,
        }),
        Err(e) => Err(e),
    }
}
