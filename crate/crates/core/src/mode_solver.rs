//! Per-mode wave ODE `v̈ + ν²κ(t) v = f̂(t)` as the first-order system
//! `V₁ = iν v̂`, `V₂ = ∂ₜv̂`, `∂ₜV = iν A(t) V + F(t)` with `A = [[0, 1], [κ, 0]]`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{Side, TimeCoefficient};
use crate::error::{Error, Result};
use crate::integrator::{integrate, Dop853Config, Dop853Stats};
use crate::quadrature::gauss_legendre_20;

/// Relative slack in the Gronwall check.
pub const GRONWALL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// `∂²u + a(t)(H + q(t))u = f`, so `κ = a(1 + q/ν²)`.
    CPa,
    /// `∂²u + a(t)Hu + q(t)u = f`, so `κ = a + q/ν²`.
    CPb,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::CPa => "CPa",
            Variant::CPb => "CPb",
        })
    }
}

/// `f̂(t) = amplitude · e^{iσt} · envelope(t)`.
#[derive(Debug, Clone)]
pub struct ModeForcing {
    pub amplitude: Complex64,
    pub frequency: f64,
    pub envelope: Option<Arc<dyn TimeCoefficient>>,
}

impl ModeForcing {
    pub fn exponential(amplitude: Complex64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
            envelope: None,
        }
    }

    pub fn eval(&self, t: f64, side: Side) -> Complex64 {
        let env = self.envelope.as_ref().map_or(1.0, |e| e.value(t, side));
        self.amplitude * Complex64::from_polar(env, self.frequency * t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.envelope.as_ref().map_or_else(Vec::new, |e| e.breakpoints())
    }
}

#[derive(Debug, Clone)]
pub struct ModeODE {
    nu2: f64,
    a: Arc<dyn TimeCoefficient>,
    q: Arc<dyn TimeCoefficient>,
    variant: Variant,
    forcing: Option<ModeForcing>,
}

impl ModeODE {
    pub fn new(
        nu2: f64,
        a: Arc<dyn TimeCoefficient>,
        q: Arc<dyn TimeCoefficient>,
        variant: Variant,
        forcing: Option<ModeForcing>,
    ) -> Result<Self> {
        if !(nu2 > 0.0 && nu2.is_finite()) {
            return Err(Error::InvalidInput(format!("nu^2 must be positive, got {nu2}")));
        }
        Ok(Self {
            nu2,
            a,
            q,
            variant,
            forcing,
        })
    }

    pub fn nu2(&self) -> f64 {
        self.nu2
    }

    pub fn nu(&self) -> f64 {
        self.nu2.sqrt()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn forcing(&self) -> Option<&ModeForcing> {
        self.forcing.as_ref()
    }

    pub fn kappa(&self, t: f64, side: Side) -> f64 {
        let a = self.a.value(t, side);
        let q = self.q.value(t, side);
        match self.variant {
            Variant::CPa => a * (1.0 + q / self.nu2),
            Variant::CPb => a + q / self.nu2,
        }
    }

    pub fn kappa_derivative(&self, t: f64, side: Side) -> f64 {
        let da = self.a.derivative(t, side);
        let dq = self.q.derivative(t, side);
        match self.variant {
            Variant::CPa => da * (1.0 + self.q.value(t, side) / self.nu2) + self.a.value(t, side) * dq / self.nu2,
            Variant::CPb => da + dq / self.nu2,
        }
    }

    pub fn forcing_value(&self, t: f64, side: Side) -> Complex64 {
        self.forcing.as_ref().map_or(Complex64::new(0.0, 0.0), |f| f.eval(t, side))
    }

    /// Interior times where a coefficient or the forcing may jump or peak.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.a.breakpoints();
        v.extend(self.q.breakpoints());
        if let Some(f) = &self.forcing {
            v.extend(f.breakpoints());
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    fn sample_times(&self, t_lo: f64, t_hi: f64) -> Vec<f64> {
        const SAMPLES: usize = 2000;
        let mut ts: Vec<f64> = (0..=SAMPLES)
            .map(|i| t_lo + (t_hi - t_lo) * i as f64 / SAMPLES as f64)
            .collect();
        ts.extend(self.breakpoints().into_iter().filter(|b| *b >= t_lo && *b <= t_hi));
        ts
    }

    /// `max κ` over sampled times of `[t_lo, t_hi]`, both one-sided limits included.
    pub fn kappa_sup(&self, t_lo: f64, t_hi: f64) -> f64 {
        self.sample_times(t_lo, t_hi)
            .into_iter()
            .flat_map(|t| [self.kappa(t, Side::Left), self.kappa(t, Side::Right)])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min κ` over sampled times of `[t_lo, t_hi]`.
    pub fn kappa_inf(&self, t_lo: f64, t_hi: f64) -> f64 {
        self.sample_times(t_lo, t_hi)
            .into_iter()
            .flat_map(|t| [self.kappa(t, Side::Left), self.kappa(t, Side::Right)])
            .fold(f64::INFINITY, f64::min)
    }

    /// `∫ c′` over `[t_a, t_b]` with `c′ = |κ′| / min(κ, 1)`, plus
    /// `|Δκ| / min(κ⁻, κ⁺, 1)` at every jump.
    pub fn gronwall_exponent(&self, t_a: f64, t_b: f64) -> f64 {
        let (lo, hi) = (t_a.min(t_b), t_a.max(t_b));
        if hi <= lo {
            return 0.0;
        }
        let mut cuts = vec![lo, hi];
        cuts.extend(self.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rule = gauss_legendre_20();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let panels = ((b - a) / 0.02).ceil().max(1.0) as usize;
            total += rule.integrate_composite(a, b, panels, |s| {
                self.kappa_derivative(s, Side::Right).abs() / self.kappa(s, Side::Right).min(1.0)
            });
        }
        for &b in &cuts[1..cuts.len() - 1] {
            let (kl, kr) = (self.kappa(b, Side::Left), self.kappa(b, Side::Right));
            total += (kr - kl).abs() / kl.min(kr).min(1.0);
        }
        total
    }

    /// `∫ |f̂|²` over `[t_a, t_b]`.
    pub fn forcing_energy(&self, t_a: f64, t_b: f64) -> f64 {
        if self.forcing.is_none() {
            return 0.0;
        }
        let (lo, hi) = (t_a.min(t_b), t_a.max(t_b));
        if hi <= lo {
            return 0.0;
        }
        let mut cuts = vec![lo, hi];
        cuts.extend(self.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rule = gauss_legendre_20();
        cuts.windows(2)
            .map(|w| {
                let panels = ((w[1] - w[0]) / 0.02).ceil().max(1.0) as usize;
                rule.integrate_composite(w[0], w[1], panels, |s| self.forcing_value(s, Side::Right).norm_sqr())
            })
            .sum()
    }
}

/// `A(t)` and `F(t)` of `∂ₜV = iν A V + F`.
pub fn assemble_system(ode: &ModeODE, t: f64) -> ([[f64; 2]; 2], [Complex64; 2]) {
    let kappa = ode.kappa(t, Side::Right);
    (
        [[0.0, 1.0], [kappa, 0.0]],
        [Complex64::new(0.0, 0.0), ode.forcing_value(t, Side::Right)],
    )
}

/// `S = diag(s11, 1)` with `s11 = κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symmetriser {
    pub s11: f64,
}

impl Symmetriser {
    pub fn s22(&self) -> f64 {
        1.0
    }

    /// `SA − AᵀS`.
    pub fn commutator(&self, a: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let s = [[self.s11, 0.0], [0.0, 1.0]];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let sa: f64 = (0..2).map(|k| s[i][k] * a[k][j]).sum();
                let ats: f64 = (0..2).map(|k| a[k][i] * s[k][j]).sum();
                out[i][j] = sa - ats;
            }
        }
        out
    }
}

pub fn symmetriser_eval(ode: &ModeODE, t: f64) -> Symmetriser {
    Symmetriser {
        s11: ode.kappa(t, Side::Right),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub t: f64,
    /// `iν v̂`.
    pub v1: Complex64,
    /// `∂ₜ v̂`.
    pub v2: Complex64,
}

impl ModeState {
    pub fn from_data(t: f64, nu: f64, v: Complex64, dv: Complex64) -> Self {
        Self {
            t,
            v1: Complex64::new(0.0, nu) * v,
            v2: dv,
        }
    }

    pub fn v_hat(&self, nu: f64) -> Complex64 {
        self.v1 / Complex64::new(0.0, nu)
    }

    pub fn dv_hat(&self) -> Complex64 {
        self.v2
    }

    /// `|V₁|² + |V₂|² = ν²|v̂|² + |∂ₜv̂|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.v1.norm_sqr() + self.v2.norm_sqr()
    }

    fn to_real(self) -> [f64; 4] {
        [self.v1.re, self.v1.im, self.v2.re, self.v2.im]
    }

    fn from_real(t: f64, y: &[f64; 4]) -> Self {
        Self {
            t,
            v1: Complex64::new(y[0], y[1]),
            v2: Complex64::new(y[2], y[3]),
        }
    }
}

pub fn energy(state: &ModeState, sym: &Symmetriser) -> f64 {
    sym.s11 * state.v1.norm_sqr() + state.v2.norm_sqr()
}

/// `(t, E(t))` samples in integration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub points: Vec<(f64, f64)>,
}

impl EnergyTrace {
    pub fn initial(&self) -> Option<f64> {
        self.points.first().map(|p| p.1)
    }

    /// `max |E(t)/E(0) − 1|`.
    pub fn max_relative_drift(&self) -> f64 {
        let Some(e0) = self.initial() else { return 0.0 };
        if e0 == 0.0 {
            return 0.0;
        }
        self.points.iter().map(|(_, e)| (e / e0 - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step as a fraction of the shortest local period `2π/(ν√max κ)`.
    pub max_step_fraction: f64,
    pub max_steps: usize,
    /// Re-run with halved step cap and tighter tolerances and compare.
    pub verify: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step_fraction: 0.1,
            max_steps: 2_000_000,
            verify: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::InvalidInput(format!("{name} must lie in (0, 1e-2], got {v}")));
            }
        }
        if !(self.max_step_fraction > 0.0 && self.max_step_fraction <= 0.1) {
            return Err(Error::InvalidInput(format!(
                "max_step_fraction must lie in (0, 0.1], got {}",
                self.max_step_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub states: Vec<ModeState>,
    pub trace: EnergyTrace,
    pub stats: Dop853Stats,
}

/// Solves from `t = 0` with `v̂(0) = v0`, `∂ₜv̂(0) = v1`.
pub fn integrate_mode(
    ode: &ModeODE,
    v0: Complex64,
    v1: Complex64,
    out_times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<ModeSolution> {
    let start = ModeState::from_data(0.0, ode.nu(), v0, v1);
    integrate_mode_from(ode, start, out_times, cfg)
}

/// Solves from an arbitrary state, forwards or backwards in time.
pub fn integrate_mode_from(
    ode: &ModeODE,
    start: ModeState,
    out_times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<ModeSolution> {
    cfg.validate()?;
    let first = run(ode, start, out_times, cfg, 1.0)?;
    if cfg.verify {
        let tight = IntegratorConfig {
            rel_tol: cfg.rel_tol / 256.0,
            abs_tol: cfg.abs_tol / 256.0,
            ..*cfg
        };
        let check = run(ode, start, out_times, &tight, 0.5)?;
        let scale = first.states.iter().map(|s| s.norm_sqr().sqrt()).fold(0.0, f64::max);
        let deviation = first
            .states
            .iter()
            .zip(&check.states)
            .map(|(a, b)| ((a.v1 - b.v1).norm_sqr() + (a.v2 - b.v2).norm_sqr()).sqrt())
            .fold(0.0, f64::max);
        let allowed = 100.0 * (cfg.abs_tol + cfg.rel_tol * scale);
        if deviation > allowed {
            return Err(Error::ToleranceNotMet { deviation, allowed });
        }
    }
    Ok(first)
}

fn run(ode: &ModeODE, start: ModeState, out_times: &[f64], cfg: &IntegratorConfig, cap_scale: f64) -> Result<ModeSolution> {
    let nu = ode.nu();
    let t_end = out_times.last().copied().unwrap_or(start.t);
    let kappa_max = ode.kappa_sup(start.t.min(t_end), start.t.max(t_end)).max(f64::MIN_POSITIVE);
    let h_max = cap_scale * cfg.max_step_fraction * 2.0 * PI / (nu * kappa_max.sqrt());
    let dcfg = Dop853Config {
        rtol: cfg.rel_tol,
        atol: cfg.abs_tol,
        h_max,
        max_steps: cfg.max_steps,
    };
    let rhs = |t: f64, side: Side, y: &[f64; 4], dy: &mut [f64; 4]| {
        let kappa = ode.kappa(t, side);
        let f = ode.forcing_value(t, side);
        // dV₁ = iν V₂, dV₂ = iνκ V₁ + f
        dy[0] = -nu * y[3];
        dy[1] = nu * y[2];
        dy[2] = -nu * kappa * y[1] + f.re;
        dy[3] = nu * kappa * y[0] + f.im;
    };
    let (ys, stats) = integrate(rhs, start.t, start.to_real(), out_times, &ode.breakpoints(), &dcfg)?;
    let states: Vec<ModeState> = out_times.iter().zip(&ys).map(|(&t, y)| ModeState::from_real(t, y)).collect();
    let trace = EnergyTrace {
        points: states
            .iter()
            .map(|s| {
                let side = if s.t == t_end && t_end > start.t { Side::Left } else { Side::Right };
                (s.t, ode.kappa(s.t, side) * s.v1.norm_sqr() + s.v2.norm_sqr())
            })
            .collect(),
    };
    Ok(ModeSolution { states, trace, stats })
}

/// Exact solution `(v̂(t), ∂ₜv̂(t))` for constant coefficients, optionally
/// forced by `F₀e^{iσt}`.
#[allow(clippy::too_many_arguments)]
pub fn closed_form_constant(
    a0: f64,
    q0: f64,
    nu2: f64,
    variant: Variant,
    v0: Complex64,
    v1: Complex64,
    t: f64,
    forcing: Option<(Complex64, f64)>,
) -> Result<(Complex64, Complex64)> {
    let mu2 = match variant {
        Variant::CPa => a0 * (q0 + nu2),
        Variant::CPb => a0 * nu2 + q0,
    };
    if !(mu2 > 0.0) {
        return Err(Error::InvalidInput(format!("mu^2 = {mu2} must be positive")));
    }
    let mu = mu2.sqrt();
    let (mut h0, mut h1) = (v0, v1);
    let mut particular = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    if let Some((f0, sigma)) = forcing {
        let sigma2 = sigma * sigma;
        if (mu2 - sigma2).abs() <= 1e-12 * mu2 {
            return Err(Error::Resonance { sigma2, mu2 });
        }
        let c = f0 / (mu2 - sigma2);
        let iw = Complex64::new(0.0, sigma);
        h0 -= c;
        h1 -= iw * c;
        let p = c * Complex64::from_polar(1.0, sigma * t);
        particular = (p, iw * p);
    }
    let (c, s) = ((mu * t).cos(), (mu * t).sin());
    let v = h0 * c + h1 * s / mu + particular.0;
    let dv = -h0 * mu * s + h1 * c + particular.1;
    Ok((v, dv))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub holds: bool,
    /// `max_t E(t) / bound(t)`.
    pub worst_ratio: f64,
}

/// Checks `E(t) ≤ (E(0) + ∫|f̂|²)·exp(∫₀ᵗ c′ (+1 if forced))·(1 + tol)` along the trace.
pub fn gronwall_bound_check(trace: &EnergyTrace, ode: &ModeODE) -> Result<GronwallReport> {
    let Some(&(t0, e0)) = trace.points.first() else {
        return Err(Error::InvalidInput("energy trace is empty".into()));
    };
    let forced = ode.forcing.is_some();
    let mut worst: f64 = 0.0;
    let mut exponent = 0.0;
    let mut forcing_mass = 0.0;
    let mut prev = t0;
    for &(t, e) in &trace.points {
        exponent += ode.gronwall_exponent(prev, t);
        if forced {
            forcing_mass += ode.forcing_energy(prev, t);
        }
        prev = t;
        let elapsed = if forced { (t - t0).abs() } else { 0.0 };
        let bound = (e0 + forcing_mass) * (exponent + elapsed).exp() * (1.0 + GRONWALL_TOL);
        if bound > 0.0 {
            worst = worst.max(e / bound);
        } else if e > 0.0 {
            worst = f64::INFINITY;
        }
    }
    Ok(GronwallReport {
        holds: worst <= 1.0,
        worst_ratio: worst,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub passed: bool,
    /// `max_t (ν²|v̂|² + |∂ₜv̂|²) / (ν²|v₀|² + |v₁|² + ∫|f̂|²)`.
    pub measured_ratio: f64,
    /// `C₁′` from the energy equivalence and Gronwall constants.
    pub constant: f64,
}

/// Checks `ν²|v̂(t)|² + |∂ₜv̂(t)|² ≤ C₁′ (ν²|v₀|² + |v₁|² + ∫|f̂|²)` on the given states, with
/// `C₁′ = max(κ(0), 1) · exp(∫c′ (+T if forced)) / min_t min(κ, 1)`.
pub fn mode_estimate_check(ode: &ModeODE, v0: Complex64, v1: Complex64, states: &[ModeState]) -> EstimateReport {
    let t_max = states.iter().map(|s| s.t).fold(0.0, f64::max);
    let constant = estimate_constant(ode, t_max);
    let data = ModeState::from_data(0.0, ode.nu(), v0, v1).norm_sqr() + ode.forcing_energy(0.0, t_max);
    let lhs = states.iter().map(ModeState::norm_sqr).fold(0.0, f64::max);
    if data == 0.0 {
        return EstimateReport {
            passed: lhs == 0.0,
            measured_ratio: if lhs == 0.0 { 0.0 } else { f64::INFINITY },
            constant,
        };
    }
    let measured_ratio = lhs / data;
    EstimateReport {
        passed: measured_ratio <= constant * (1.0 + GRONWALL_TOL),
        measured_ratio,
        constant,
    }
}

/// `C₁′` over `[0, t_max]`.
pub fn estimate_constant(ode: &ModeODE, t_max: f64) -> f64 {
    let forced = ode.forcing.is_some();
    let k0 = ode.kappa(0.0, Side::Right);
    let kmin = ode.kappa_inf(0.0, t_max).min(1.0);
    let exponent = ode.gronwall_exponent(0.0, t_max) + if forced { t_max } else { 0.0 };
    k0.max(1.0) * exponent.exp() / kmin
}
