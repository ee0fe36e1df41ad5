//! Quadrature rules: Gauss–Legendre for time integrals and a polar
//! Gauss–Laguerre × trapezoid grid for integrals over the plane.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule with `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                let hi = if p + 1 == panels { b } else { lo + h };
                self.integrate(lo, hi, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 20-point rule used for all time-domain integrals.
pub fn gauss_legendre_20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// Gauss–Laguerre rule for `∫_0^∞ g(ρ) e^{-ρ} dρ`.
///
/// `scaled_weights[i] = w_i · e^{ρ_i}` so that `∫_0^∞ h(ρ) dρ ≈ Σ scaled_weights[i] · h(ρ_i)`
/// for integrands `h` that already carry their exponential decay. Plain weights
/// underflow for the outer nodes of large rules; the scaled ones stay O(1).
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Laguerre rule needs at least one node");
        // Golub-Welsch for starting values, Newton polish on L_n.
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 * i as f64 + 1.0
            } else if i + 1 == j || j + 1 == i {
                i.max(j) as f64
            } else {
                0.0
            }
        });
        let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        guesses.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut nodes = Vec::with_capacity(n);
        let mut scaled_weights = Vec::with_capacity(n);
        for mut x in guesses {
            let mut converged = false;
            for _ in 0..50 {
                let (ln, lnm1, _) = scaled_laguerre_pair(n, x);
                let dx = x * ln / (n as f64 * (ln - lnm1));
                x -= dx;
                if converged {
                    break;
                }
                converged = dx.abs() <= 1e-15 * x;
            }
            // w_i = x_i / ((n+1)^2 L_{n+1}(x_i)^2)
            let (lnp1, _, log_scale) = scaled_laguerre_pair(n + 1, x);
            let log_w = x.ln() - 2.0 * ((n + 1) as f64).ln() - 2.0 * (lnp1.abs().ln() + log_scale) + x;
            nodes.push(x);
            scaled_weights.push(log_w.exp());
        }
        Self {
            nodes,
            scaled_weights,
        }
    }
}

/// Returns `(p_n, p_{n-1}, s)` with `L_n(x) = p_n e^s` and `L_{n-1}(x) = p_{n-1} e^s`.
fn scaled_laguerre_pair(n: usize, x: f64) -> (f64, f64, f64) {
    const BIG: f64 = 1e150;
    let mut log_scale = 0.0;
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    let mut p1 = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        if p1.abs() > BIG {
            p0 /= BIG;
            p1 /= BIG;
            log_scale += BIG.ln();
        }
    }
    (p1, p0, log_scale)
}

/// Polar quadrature grid on R² adapted to integrands `poly(r²)·e^{-B r²}·e^{imθ}`.
///
/// The radial rule is Gauss–Laguerre in `ρ = B r²`; the angular rule is the
/// trapezoid rule on `angular_count` equispaced angles.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    b: f64,
    /// `(radius, weight)` pairs; the weight includes the Jacobian `r dr`.
    pub radial_nodes: Vec<(f64, f64)>,
    pub angular_count: usize,
}

impl QuadratureGrid {
    pub const DEFAULT_RADIAL: usize = 200;
    pub const DEFAULT_ANGULAR: usize = 256;
    /// Relative accuracy of the default grid on `∫ e^{-B r²} = π / B`.
    pub const DECLARED_TOLERANCE: f64 = 1e-10;

    pub fn new(b: f64, radial: usize, angular_count: usize) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!("magnetic strength B must be positive, got {b}")));
        }
        if radial == 0 || angular_count == 0 {
            return Err(Error::InvalidInput("quadrature node counts must be >= 1".into()));
        }
        let rule = GaussLaguerre::new(radial);
        // dx dy = r dr dθ, ρ = B r² ⇒ r dr = dρ / (2B)
        let radial_nodes = rule
            .nodes
            .iter()
            .zip(&rule.scaled_weights)
            .map(|(rho, w)| ((rho / b).sqrt(), w / (2.0 * b)))
            .collect();
        Ok(Self {
            b,
            radial_nodes,
            angular_count,
        })
    }

    /// Default 200 × 256 grid.
    pub fn default_for(b: f64) -> Result<Self> {
        Self::new(b, Self::DEFAULT_RADIAL, Self::DEFAULT_ANGULAR)
    }

    pub fn magnetic_strength(&self) -> f64 {
        self.b
    }

    pub fn radial_count(&self) -> usize {
        self.radial_nodes.len()
    }

    pub fn len(&self) -> usize {
        self.radial_nodes.len() * self.angular_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Highest degree in `ρ = B r²` integrated exactly against `e^{-ρ}`.
    pub fn radial_degree(&self) -> usize {
        2 * self.radial_nodes.len() - 1
    }

    /// Fails unless the grid integrates `ρ^degree e^{-ρ} e^{i m θ}` exactly for `|m| ≤ angular_order`.
    pub fn check_resolves(&self, what: &str, radial_degree: usize, angular_order: usize) -> Result<()> {
        if radial_degree > self.radial_degree() {
            return Err(Error::Resolution {
                what: format!("{what} (radial degree in r^2)"),
                needed: radial_degree,
                available: self.radial_degree(),
            });
        }
        if angular_order >= self.angular_count {
            return Err(Error::Resolution {
                what: format!("{what} (angular frequency)"),
                needed: angular_order + 1,
                available: self.angular_count,
            });
        }
        Ok(())
    }

    /// Quadrature points `(x, y, weight)` in fixed order: radial outer, angular inner.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let m = self.angular_count;
        let dtheta = 2.0 * PI / m as f64;
        self.radial_nodes.iter().flat_map(move |&(r, w)| {
            (0..m).map(move |k| {
                let theta = dtheta * k as f64;
                (r * theta.cos(), r * theta.sin(), w * dtheta)
            })
        })
    }

    /// Approximates `∫_{R²} f(x, y) dx dy`.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        self.points().map(|(x, y, w)| w * f(x, y)).sum()
    }

    /// Radius beyond which `e^{-B r²}` is below `1e-12`.
    pub fn effective_radius(&self) -> f64 {
        (12.0 * std::f64::consts::LN_10 / self.b).sqrt()
    }
}
