//! Landau levels, Laguerre polynomials and the eigenfunctions of the Landau
//! Hamiltonian `H = ½[(i∂_x − By)² + (i∂_y + Bx)²]` on the plane.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureGrid;

/// Degree up to which [`laguerre_eval`] uses the explicit alternating sum.
pub const LAGUERRE_SUM_MAX_DEGREE: u32 = 12;

/// Magnetic strength `B > 0` (field strength `2B`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisParams {
    b: f64,
}

impl BasisParams {
    pub fn new(b: f64) -> Result<Self> {
        if b > 0.0 && b.is_finite() {
            Ok(Self { b })
        } else {
            Err(Error::Domain(format!("magnetic strength B must be positive and finite, got {b}")))
        }
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Spectral index `ξ = (j, n) ∈ N₀²`; `n` selects the Landau level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpectralIndex {
    pub j: u32,
    pub n: u32,
}

impl SpectralIndex {
    pub const fn new(j: u32, n: u32) -> Self {
        Self { j, n }
    }
}

impl fmt::Display for SpectralIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.n)
    }
}

/// Which of the two eigenfunction families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    One,
    Two,
}

impl Component {
    pub const ALL: [Component; 2] = [Component::One, Component::Two];

    pub fn number(self) -> u8 {
        match self {
            Component::One => 1,
            Component::Two => 2,
        }
    }

    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Component::One),
            2 => Ok(Component::Two),
            other => Err(Error::InvalidInput(format!("component must be 1 or 2, got {other}"))),
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > -1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Laguerre parameter alpha must exceed -1, got {alpha}")))
    }
}

/// Generalized Laguerre polynomial `L_n^{(α)}(t)`.
///
/// Degrees up to [`LAGUERRE_SUM_MAX_DEGREE`] use the explicit sum, larger
/// degrees the three-term recurrence.
pub fn laguerre_eval(n: u32, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n <= LAGUERRE_SUM_MAX_DEGREE && t.is_finite() {
        laguerre_sum(n, alpha, t)
    } else {
        Ok(laguerre_recurrence(n, alpha, t))
    }
}

/// `Σ_{k=0}^{n} (−1)^k C(n+α, n−k) t^k / k!`, evaluated in exact rational
/// arithmetic and rounded once at the end.
///
/// The alternating sum cancels catastrophically in floating point for large
/// `t`; with exact arithmetic every input double gives the correctly rounded value.
pub fn laguerre_sum(n: u32, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let alpha_q = BigRational::from_float(alpha)
        .ok_or_else(|| Error::Domain(format!("alpha is not finite: {alpha}")))?;
    let t_q = BigRational::from_float(t).ok_or_else(|| Error::Domain(format!("t is not finite: {t}")))?;

    let mut total = BigRational::zero();
    let mut t_pow = BigRational::one();
    let mut k_fact = BigInt::one();
    for k in 0..=n {
        if k > 0 {
            t_pow *= &t_q;
            k_fact *= BigInt::from(k);
        }
        // C(n+α, n−k) = Π_{i=1}^{n−k} (α + k + i) / i
        let mut binom = BigRational::one();
        for i in 1..=(n - k) {
            let num = &alpha_q + BigRational::from_integer(BigInt::from(k + i));
            binom = binom * num / BigRational::from_integer(BigInt::from(i));
        }
        let term = binom * &t_pow / BigRational::from_integer(k_fact.clone());
        if k % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
        .to_f64()
        .ok_or_else(|| Error::Domain(format!("L_{n}^({alpha})({t}) is not representable")))
}

/// Three-term recurrence `(k+1) L_{k+1} = (2k+1+α−t) L_k − (k+α) L_{k−1}`.
pub fn laguerre_recurrence(n: u32, alpha: f64, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 1.0 + alpha - t;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 + alpha - t) * p1 - (kf + alpha) * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Landau level `λ_n = (2n+1)B`.
pub fn eigenvalue(n: u32, params: BasisParams) -> f64 {
    params.b + 2.0 * params.b * n as f64
}

/// `ν²(ξ) = B + 2Bξ₂`; independent of `ξ₁ = j`.
pub fn nu_squared(xi: SpectralIndex, params: BasisParams) -> f64 {
    eigenvalue(xi.n, params)
}

/// Unnormalized eigenfunction value without the analytic prefactors:
///
/// * component 1: `(x+iy)^j L_n^{(j)}(B r²) e^{−B r²/2}`
/// * component 2: `(x−iy)^n L_j^{(n)}(B r²) e^{−B r²/2}`
pub fn basis_eval_raw(component: Component, xi: SpectralIndex, params: BasisParams, x: f64, y: f64) -> Complex64 {
    let rho = params.b * (x * x + y * y);
    let gauss = (-0.5 * rho).exp();
    match component {
        Component::One => {
            let z = Complex64::new(x, y).powu(xi.j);
            z * (laguerre_recurrence(xi.n, xi.j as f64, rho) * gauss)
        }
        Component::Two => {
            let z = Complex64::new(x, -y).powu(xi.n);
            z * (laguerre_recurrence(xi.j, xi.n as f64, rho) * gauss)
        }
    }
}

fn check_grid(params: BasisParams, grid: &QuadratureGrid) -> Result<()> {
    if grid.magnetic_strength() != params.b {
        return Err(Error::InvalidInput(format!(
            "quadrature grid built for B = {} used with B = {}",
            grid.magnetic_strength(),
            params.b
        )));
    }
    Ok(())
}

fn check_norm_resolution(xi: SpectralIndex, grid: &QuadratureGrid) -> Result<()> {
    grid.check_resolves(
        &format!("basis function {xi}"),
        2 * (xi.n + xi.j) as usize + 1,
        0,
    )
}

/// `L²(R²)` norm of [`basis_eval_raw`] by quadrature.
pub fn basis_norm(component: Component, xi: SpectralIndex, params: BasisParams, grid: &QuadratureGrid) -> Result<f64> {
    check_grid(params, grid)?;
    check_norm_resolution(xi, grid)?;
    Ok(grid
        .integrate(|x, y| basis_eval_raw(component, xi, params, x, y).norm_sqr())
        .sqrt())
}

/// Unit-normalized eigenfunction value.
pub fn basis_eval(
    component: Component,
    xi: SpectralIndex,
    params: BasisParams,
    x: f64,
    y: f64,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    let norm = basis_norm(component, xi, params, grid)?;
    Ok(basis_eval_raw(component, xi, params, x, y) / norm)
}

/// `⟨f, g⟩ = ∫ f ḡ` by quadrature.
pub fn inner_product<F, G>(grid: &QuadratureGrid, mut f: F, mut g: G) -> Complex64
where
    F: FnMut(f64, f64) -> Complex64,
    G: FnMut(f64, f64) -> Complex64,
{
    grid.points()
        .map(|(x, y, w)| f(x, y) * g(x, y).conj() * w)
        .sum()
}

/// `H φ` by second-order central differences with spacing `h`.
pub fn apply_hamiltonian_fd<F>(params: BasisParams, h: f64, x: f64, y: f64, phi: F) -> Complex64
where
    F: Fn(f64, f64) -> Complex64,
{
    let b = params.b;
    let c = phi(x, y);
    let xp = phi(x + h, y);
    let xm = phi(x - h, y);
    let yp = phi(x, y + h);
    let ym = phi(x, y - h);
    let dx = (xp - xm) / (2.0 * h);
    let dy = (yp - ym) / (2.0 * h);
    let lap = (xp + xm + yp + ym - c * 4.0) / (h * h);
    // H = ½[−Δ − 2iB(y∂_x − x∂_y) + B² r²]
    let i = Complex64::i();
    (-lap - i * (2.0 * b) * (dx * y - dy * x) + c * (b * b * (x * x + y * y))) * 0.5
}

/// Relative eigen-residual `‖H e − λ_n e‖ / ‖e‖` with `H` applied by finite
/// differences of spacing `h` and `λ_n` the Landau level of `xi.n`.
pub fn eigen_residual(
    component: Component,
    xi: SpectralIndex,
    params: BasisParams,
    grid: &QuadratureGrid,
    h: f64,
) -> Result<f64> {
    check_grid(params, grid)?;
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("stencil spacing must be positive, got {h}")));
    }
    let lambda = eigenvalue(xi.n, params);
    let phi = |x: f64, y: f64| basis_eval_raw(component, xi, params, x, y);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y, w) in grid.points() {
        let e = phi(x, y);
        let he = apply_hamiltonian_fd(params, h, x, y, phi);
        num += w * (he - e * lambda).norm_sqr();
        den += w * e.norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// Normalized eigenfunctions on a fixed quadrature grid, with cached norms.
#[derive(Debug)]
pub struct NormalizedBasis {
    params: BasisParams,
    grid: QuadratureGrid,
    norms: Mutex<BTreeMap<(Component, SpectralIndex), f64>>,
}

impl NormalizedBasis {
    pub fn new(params: BasisParams, grid: QuadratureGrid) -> Result<Self> {
        check_grid(params, &grid)?;
        Ok(Self {
            params,
            grid,
            norms: Mutex::new(BTreeMap::new()),
        })
    }

    /// Default 200 × 256 grid for `params`.
    pub fn with_default_grid(params: BasisParams) -> Result<Self> {
        Self::new(params, QuadratureGrid::default_for(params.b)?)
    }

    pub fn params(&self) -> BasisParams {
        self.params
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn norm(&self, component: Component, xi: SpectralIndex) -> Result<f64> {
        if let Some(v) = self.norms.lock().unwrap().get(&(component, xi)) {
            return Ok(*v);
        }
        let v = basis_norm(component, xi, self.params, &self.grid)?;
        self.norms.lock().unwrap().insert((component, xi), v);
        Ok(v)
    }

    pub fn eval(&self, component: Component, xi: SpectralIndex, x: f64, y: f64) -> Result<Complex64> {
        Ok(basis_eval_raw(component, xi, self.params, x, y) / self.norm(component, xi)?)
    }

    /// Normalized samples at every grid point, in [`QuadratureGrid::points`] order.
    pub fn samples(&self, component: Component, xi: SpectralIndex) -> Result<Vec<Complex64>> {
        let norm = self.norm(component, xi)?;
        Ok(self
            .grid
            .points()
            .map(|(x, y, _)| basis_eval_raw(component, xi, self.params, x, y) / norm)
            .collect())
    }
}
