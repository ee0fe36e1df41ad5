//! The H-Fourier transform: expansion in the Landau eigenbasis on a
//! rectangular truncation of `N₀²`, with Plancherel and Sobolev norms.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::spectral_basis::{nu_squared, BasisParams, Component, NormalizedBasis, SpectralIndex};

/// Rectangular index set `0 ≤ j ≤ j_max`, `0 ≤ n ≤ n_max` over a set of components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub j_max: u32,
    pub n_max: u32,
    components: Vec<Component>,
}

impl TruncationSpec {
    pub fn new(j_max: u32, n_max: u32, components: &[Component]) -> Result<Self> {
        let mut components = components.to_vec();
        components.sort();
        components.dedup();
        if components.is_empty() {
            return Err(Error::InvalidInput("truncation needs at least one component".into()));
        }
        Ok(Self {
            j_max,
            n_max,
            components,
        })
    }

    /// Component-1-only truncation, the default for physical-space work.
    pub fn component_one(j_max: u32, n_max: u32) -> Self {
        Self {
            j_max,
            n_max,
            components: vec![Component::One],
        }
    }

    pub fn both(j_max: u32, n_max: u32) -> Self {
        Self {
            j_max,
            n_max,
            components: Component::ALL.to_vec(),
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn has_component(&self, c: Component) -> bool {
        self.components.contains(&c)
    }

    pub fn contains(&self, xi: SpectralIndex) -> bool {
        xi.j <= self.j_max && xi.n <= self.n_max
    }

    /// All indices in ascending `(j, n)` order.
    pub fn indices(&self) -> impl Iterator<Item = SpectralIndex> + '_ {
        (0..=self.j_max).flat_map(move |j| (0..=self.n_max).map(move |n| SpectralIndex::new(j, n)))
    }

    pub fn mode_count(&self) -> usize {
        (self.j_max as usize + 1) * (self.n_max as usize + 1)
    }
}

/// Diagonal entries `f̂(ξ)₁₁`, `f̂(ξ)₂₂` of one matrix-valued coefficient.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModeCoefficient {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl ModeCoefficient {
    pub fn get(&self, c: Component) -> Complex64 {
        match c {
            Component::One => self.c1,
            Component::Two => self.c2,
        }
    }

    pub fn get_mut(&mut self, c: Component) -> &mut Complex64 {
        match c {
            Component::One => &mut self.c1,
            Component::Two => &mut self.c2,
        }
    }

    /// Squared Hilbert–Schmidt norm of the diagonal matrix.
    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }
}

/// Coefficients `f̂(ξ)` over a truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    params: BasisParams,
    trunc: TruncationSpec,
    coeffs: BTreeMap<SpectralIndex, ModeCoefficient>,
}

impl SpectralField {
    pub fn zeros(params: BasisParams, trunc: TruncationSpec) -> Self {
        Self {
            params,
            trunc,
            coeffs: BTreeMap::new(),
        }
    }

    /// Field with one nonzero entry.
    pub fn single(
        params: BasisParams,
        trunc: TruncationSpec,
        xi: SpectralIndex,
        component: Component,
        value: Complex64,
    ) -> Result<Self> {
        let mut f = Self::zeros(params, trunc);
        f.set(xi, component, value)?;
        Ok(f)
    }

    pub fn params(&self) -> BasisParams {
        self.params
    }

    pub fn truncation(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn set(&mut self, xi: SpectralIndex, component: Component, value: Complex64) -> Result<()> {
        if !self.trunc.contains(xi) {
            return Err(Error::InvalidInput(format!(
                "index {xi} outside truncation {}:{}",
                self.trunc.j_max, self.trunc.n_max
            )));
        }
        if !self.trunc.has_component(component) {
            return Err(Error::InvalidInput(format!(
                "component {component} not in truncation"
            )));
        }
        *self.coeffs.entry(xi).or_default().get_mut(component) = value;
        Ok(())
    }

    pub fn get(&self, xi: SpectralIndex, component: Component) -> Complex64 {
        self.coeffs
            .get(&xi)
            .map(|m| m.get(component))
            .unwrap_or_default()
    }

    pub fn mode(&self, xi: SpectralIndex) -> ModeCoefficient {
        self.coeffs.get(&xi).copied().unwrap_or_default()
    }

    /// Stored modes in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (SpectralIndex, &ModeCoefficient)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    /// Nonzero `(index, component, value)` entries in ascending order.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (SpectralIndex, Component, Complex64)> + '_ {
        self.coeffs.iter().flat_map(move |(xi, m)| {
            self.trunc
                .components()
                .iter()
                .filter_map(move |&c| {
                    let v = m.get(c);
                    (v != Complex64::new(0.0, 0.0)).then_some((*xi, c, v))
                })
        })
    }

    pub fn is_zero(&self) -> bool {
        self.nonzero_entries().next().is_none()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.params != other.params || self.trunc != other.trunc {
            return Err(Error::InvalidInput(
                "spectral fields have different parameters or truncations".into(),
            ));
        }
        Ok(())
    }

    /// `α·self + β·other`.
    pub fn axpby(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zeros(self.params, self.trunc.clone());
        for xi in self.coeffs.keys().chain(other.coeffs.keys()) {
            let a = self.mode(*xi);
            let b = other.mode(*xi);
            out.coeffs.insert(
                *xi,
                ModeCoefficient {
                    c1: alpha * a.c1 + beta * b.c1,
                    c2: alpha * a.c2 + beta * b.c2,
                },
            );
        }
        Ok(out)
    }

    /// `self − other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpby(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        for m in out.coeffs.values_mut() {
            m.c1 *= alpha;
            m.c2 *= alpha;
        }
        out
    }

    /// Applies a real per-mode multiplier.
    pub fn map_modes<F: Fn(SpectralIndex) -> f64>(&self, weight: F) -> Self {
        let mut out = self.clone();
        for (xi, m) in out.coeffs.iter_mut() {
            let w = weight(*xi);
            m.c1 *= w;
            m.c2 *= w;
        }
        out
    }

    /// Writes the `j,n,component,re,im` CSV (nonzero entries only).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "j,n,component,re,im")?;
        for (xi, c, v) in self.nonzero_entries() {
            writeln!(w, "{},{},{},{:.16e},{:.16e}", xi.j, xi.n, c.number(), v.re, v.im)?;
        }
        Ok(())
    }

    /// Parses the CSV written by [`SpectralField::write_csv`].
    pub fn read_csv<R: BufRead>(reader: R, params: BasisParams, trunc: TruncationSpec) -> Result<Self> {
        let mut field = Self::zeros(params, trunc);
        let mut lines = reader.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim_end_matches('\r') == "j,n,component,re,im" => {}
            Some((_, Ok(h))) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected header '{h}'"),
                })
            }
            Some((_, Err(e))) => return Err(Error::io("<spectral csv>", e)),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        }
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io("<spectral csv>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse { line: i + 1, message };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(bad(format!("expected 5 columns, got {}", cols.len())));
            }
            let j: u32 = cols[0].trim().parse().map_err(|e| bad(format!("j: {e}")))?;
            let n: u32 = cols[1].trim().parse().map_err(|e| bad(format!("n: {e}")))?;
            let c: u8 = cols[2].trim().parse().map_err(|e| bad(format!("component: {e}")))?;
            let re: f64 = cols[3].trim().parse().map_err(|e| bad(format!("re: {e}")))?;
            let im: f64 = cols[4].trim().parse().map_err(|e| bad(format!("im: {e}")))?;
            let component = Component::from_number(c).map_err(|e| bad(e.to_string()))?;
            field
                .set(SpectralIndex::new(j, n), component, Complex64::new(re, im))
                .map_err(|e| bad(e.to_string()))?;
        }
        Ok(field)
    }
}

/// A function on the plane at finite resolution.
#[derive(Clone)]
pub enum PhysicalField {
    /// Closed-form evaluator.
    Function(Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>),
    /// Samples at the points of a quadrature grid, in grid order.
    Samples(Vec<Complex64>),
}

impl std::fmt::Debug for PhysicalField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhysicalField::Function(_) => f.write_str("PhysicalField::Function(..)"),
            PhysicalField::Samples(s) => write!(f, "PhysicalField::Samples(len = {})", s.len()),
        }
    }
}

impl PhysicalField {
    pub fn from_fn<F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static>(f: F) -> Self {
        PhysicalField::Function(Arc::new(f))
    }

    /// Values at every grid point of `basis`.
    pub fn samples_on(&self, basis: &NormalizedBasis) -> Result<Vec<Complex64>> {
        let grid = basis.grid();
        match self {
            PhysicalField::Function(f) => Ok(grid.points().map(|(x, y, _)| f(x, y)).collect()),
            PhysicalField::Samples(s) => {
                if s.len() != grid.len() {
                    return Err(Error::InvalidInput(format!(
                        "{} samples for a grid of {} points",
                        s.len(),
                        grid.len()
                    )));
                }
                Ok(s.clone())
            }
        }
    }

    /// `L²` norm by quadrature.
    pub fn l2_norm(&self, basis: &NormalizedBasis) -> Result<f64> {
        let samples = self.samples_on(basis)?;
        let acc: f64 = basis
            .grid()
            .points()
            .zip(&samples)
            .map(|((_, _, w), v)| w * v.norm_sqr())
            .sum();
        Ok(acc.sqrt())
    }
}

fn check_truncation_resolution(trunc: &TruncationSpec, basis: &NormalizedBasis) -> Result<()> {
    let max_angular = trunc
        .components()
        .iter()
        .map(|c| match c {
            Component::One => trunc.j_max,
            Component::Two => trunc.n_max,
        })
        .max()
        .unwrap_or(0) as usize;
    basis.grid().check_resolves(
        "truncation",
        2 * (trunc.j_max + trunc.n_max) as usize + 1,
        2 * max_angular,
    )
}

/// `f̂(ξ)_kk = ∫ f · conj(e^k_ξ)` by quadrature, for every index and component in `trunc`.
pub fn forward_transform(f: &PhysicalField, trunc: &TruncationSpec, basis: &NormalizedBasis) -> Result<SpectralField> {
    check_truncation_resolution(trunc, basis)?;
    let samples = f.samples_on(basis)?;
    let weights: Vec<f64> = basis.grid().points().map(|(_, _, w)| w).collect();
    let mut out = SpectralField::zeros(basis.params(), trunc.clone());
    for xi in trunc.indices() {
        for &c in trunc.components() {
            let e = basis.samples(c, xi)?;
            let v: Complex64 = samples
                .iter()
                .zip(&e)
                .zip(&weights)
                .map(|((f, e), w)| f * e.conj() * w)
                .sum();
            out.set(xi, c, v)?;
        }
    }
    Ok(out)
}

/// `Σ_ξ [c1(ξ) e¹_ξ(x,y) + c2(ξ) e²_ξ(x,y)]` in ascending index order.
pub fn inverse_transform(fh: &SpectralField, basis: &NormalizedBasis, x: f64, y: f64) -> Result<Complex64> {
    if fh.params() != basis.params() {
        return Err(Error::InvalidInput("field and basis have different B".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, c, v) in fh.nonzero_entries() {
        acc += v * basis.eval(c, xi, x, y)?;
    }
    Ok(acc)
}

/// Samples of the inverse transform at every grid point of `basis`.
pub fn inverse_transform_on_grid(fh: &SpectralField, basis: &NormalizedBasis) -> Result<PhysicalField> {
    if fh.params() != basis.params() {
        return Err(Error::InvalidInput("field and basis have different B".into()));
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); basis.grid().len()];
    for (xi, c, v) in fh.nonzero_entries() {
        for (a, e) in acc.iter_mut().zip(basis.samples(c, xi)?) {
            *a += v * e;
        }
    }
    Ok(PhysicalField::Samples(acc))
}

/// `(Σ_ξ |c1|² + |c2|²)^{1/2}`.
pub fn plancherel_norm(fh: &SpectralField) -> f64 {
    fh.iter().map(|(_, m)| m.norm_sqr()).sum::<f64>().sqrt()
}

/// `(Σ_ξ (B+2Bξ₂)^s (|c1|² + |c2|²))^{1/2}`.
pub fn sobolev_norm(fh: &SpectralField, s: f64) -> f64 {
    let p = fh.params();
    fh.iter()
        .map(|(xi, m)| nu_squared(xi, p).powf(s) * m.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `H^{s/2} f`: multiplies each mode by `(B+2Bξ₂)^{s/2}`.
pub fn hs_apply(fh: &SpectralField, s: f64) -> SpectralField {
    let p = fh.params();
    fh.map_modes(|xi| nu_squared(xi, p).powf(0.5 * s))
}

/// Log-log fit of the largest coefficient magnitude per Landau shell against `⟨ξ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayProfile {
    pub slope: f64,
    pub intercept: f64,
}

/// Fits `log max_{ξ: ξ₂ = n} |f̂(ξ)|` against `log ⟨ξ⟩`, `⟨ξ⟩ = √((2n+1)B)`.
pub fn decay_profile(fh: &SpectralField) -> Result<DecayProfile> {
    let p = fh.params();
    let mut shells: BTreeMap<u32, f64> = BTreeMap::new();
    for (xi, m) in fh.iter() {
        let mag = m.norm_sqr().sqrt();
        if mag > 0.0 {
            let e = shells.entry(xi.n).or_insert(0.0);
            *e = e.max(mag);
        }
    }
    if shells.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "decay profile needs at least 3 populated shells, found {}",
            shells.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = shells
        .iter()
        .map(|(n, mag)| (0.5 * nu_squared(SpectralIndex::new(0, *n), p).ln(), mag.ln()))
        .unzip();
    let fit = fit_line(&xs, &ys)?;
    Ok(DecayProfile {
        slope: fit.slope,
        intercept: fit.intercept,
    })
}
