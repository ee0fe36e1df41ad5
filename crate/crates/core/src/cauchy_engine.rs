//! Full solutions of the Landau wave equation over a truncated spectral set,
//! assembled from independent per-mode solves.
//!
//! Classical solves evaluate delta-free coefficients directly; regularised
//! solves replace `a`, `q` (and a delta-carrying forcing envelope) by their
//! mollifications at width `ω(ε)`.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{Mollifier, OmegaSchedule, RegularizedCoefficient, Side, TimeCoefficient, TimeDistribution};
use crate::error::{Error, Result};
use crate::h_fourier::{sobolev_norm, SpectralField, TruncationSpec};
use crate::mode_solver::{
    estimate_constant, integrate_mode, EnergyTrace, IntegratorConfig, ModeForcing, ModeODE, ModeState, Variant,
};
use crate::spectral_basis::{nu_squared, BasisParams, Component, SpectralIndex};

/// Number of samples in the default output grid.
pub const DEFAULT_OUTPUT_SAMPLES: usize = 201;

/// Slack on the theoretical constant in [`estimate_check`].
pub const ESTIMATE_SLACK: f64 = 0.1;

/// `n` equally spaced times on `[0, T]`, endpoints included.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| if i + 1 == n { horizon } else { horizon * i as f64 / (n - 1) as f64 })
        .collect()
}

pub fn default_output_grid(horizon: f64) -> Vec<f64> {
    uniform_grid(horizon, DEFAULT_OUTPUT_SAMPLES)
}

/// One forced mode: `f̂_ξ(t) = amplitude · e^{iσt} · envelope(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingTerm {
    pub index: SpectralIndex,
    pub component: Component,
    pub amplitude: Complex64Repr,
    pub frequency: f64,
}

/// Serializable complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex64Repr {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64Repr> for Complex64 {
    fn from(c: Complex64Repr) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for Complex64Repr {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// Source term `f(t) = Σ f̂_ξ(t) e_ξ`, with an optional shared time envelope
/// that may carry deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralForcing {
    terms: Vec<ForcingTerm>,
    envelope: Option<TimeDistribution>,
}

impl SpectralForcing {
    pub fn new(mut terms: Vec<ForcingTerm>, envelope: Option<TimeDistribution>) -> Result<Self> {
        terms.sort_by_key(|t| (t.index, t.component));
        for w in terms.windows(2) {
            if (w[0].index, w[0].component) == (w[1].index, w[1].component) {
                return Err(Error::InvalidInput(format!(
                    "mode {} component {} is forced twice",
                    w[0].index,
                    w[0].component.number()
                )));
            }
        }
        Ok(Self { terms, envelope })
    }

    pub fn terms(&self) -> &[ForcingTerm] {
        &self.terms
    }

    pub fn envelope(&self) -> Option<&TimeDistribution> {
        self.envelope.as_ref()
    }

    fn term(&self, xi: SpectralIndex, c: Component) -> Option<&ForcingTerm> {
        self.terms.iter().find(|t| t.index == xi && t.component == c)
    }

    /// `f̂(t)` for a delta-free envelope.
    pub fn eval(&self, t: f64, params: BasisParams, trunc: &TruncationSpec) -> Result<SpectralField> {
        let env = match &self.envelope {
            Some(e) => e.classical()?.value(t, Side::Right),
            None => 1.0,
        };
        let mut f = SpectralField::zeros(params, trunc.clone());
        for term in &self.terms {
            let amp: Complex64 = term.amplitude.into();
            f.set(term.index, term.component, amp * Complex64::from_polar(env, term.frequency * t))?;
        }
        Ok(f)
    }
}

/// Cauchy problem `∂²u + a(t)(H + q(t))u = f` (CPa) or `∂²u + a(t)Hu + q(t)u = f` (CPb)
/// with `u(0) = u0`, `∂ₜu(0) = u1` on `[0, T]`.
#[derive(Debug, Clone)]
pub struct CauchyProblem {
    pub variant: Variant,
    pub params: BasisParams,
    pub horizon: f64,
    pub a: TimeDistribution,
    pub q: TimeDistribution,
    pub forcing: Option<SpectralForcing>,
    pub u0: SpectralField,
    pub u1: SpectralField,
    pub sobolev_order: f64,
    pub trunc: TruncationSpec,
}

impl CauchyProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {}", self.horizon)));
        }
        for (name, d) in [("a", &self.a), ("q", &self.q)] {
            if d.horizon() != self.horizon {
                return Err(Error::InvalidInput(format!(
                    "coefficient {name} is defined on [0, {}] but T = {}",
                    d.horizon(),
                    self.horizon
                )));
            }
        }
        match self.a.lower_bound() {
            Some(a0) if a0 > 0.0 => {}
            _ => {
                return Err(Error::InvalidInput(
                    "coefficient a must carry a positive lower bound a0".into(),
                ))
            }
        }
        if !self.q.is_nonnegative() {
            return Err(Error::InvalidInput("coefficient q must be nonnegative".into()));
        }
        for (name, f) in [("u0", &self.u0), ("u1", &self.u1)] {
            if f.params() != self.params || f.truncation() != &self.trunc {
                return Err(Error::InvalidInput(format!("{name} does not match the problem's basis or truncation")));
            }
            if f.iter().any(|(_, m)| !m.norm_sqr().is_finite()) {
                return Err(Error::InvalidInput(format!("{name} has non-finite coefficients")));
            }
        }
        if let Some(f) = &self.forcing {
            for t in f.terms() {
                if !self.trunc.contains(t.index) || !self.trunc.has_component(t.component) {
                    return Err(Error::InvalidInput(format!("forced mode {} lies outside the truncation", t.index)));
                }
            }
            if let Some(env) = f.envelope() {
                if env.horizon() != self.horizon {
                    return Err(Error::InvalidInput("forcing envelope horizon differs from T".into()));
                }
            }
        }
        Ok(())
    }

    /// Every `(ξ, component)` of the truncation in ascending order.
    pub fn modes(&self) -> Vec<(SpectralIndex, Component)> {
        self.trunc
            .indices()
            .flat_map(|xi| self.trunc.components().iter().map(move |&c| (xi, c)))
            .collect()
    }

    fn mode_forcing(&self, xi: SpectralIndex, c: Component, envelope: &Option<Arc<dyn TimeCoefficient>>) -> Option<ModeForcing> {
        let term = self.forcing.as_ref()?.term(xi, c)?;
        Some(ModeForcing {
            amplitude: term.amplitude.into(),
            frequency: term.frequency,
            envelope: envelope.clone(),
        })
    }
}

/// Assembled solution on an output grid.
#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub u: Vec<SpectralField>,
    pub du: Vec<SpectralField>,
    pub traces: BTreeMap<(SpectralIndex, Component), EnergyTrace>,
    /// Mollifier width used, `None` for classical solves.
    pub omega: Option<f64>,
}

fn check_out_times(out_times: &[f64], horizon: f64) -> Result<()> {
    if out_times.is_empty() {
        return Err(Error::InvalidInput("output grid is empty".into()));
    }
    if out_times.iter().any(|t| !(0.0..=horizon).contains(t)) {
        return Err(Error::InvalidInput(format!("output times must lie in [0, {horizon}]")));
    }
    if out_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("output times must be strictly increasing".into()));
    }
    Ok(())
}

type Coef = Arc<dyn TimeCoefficient>;

/// Time coefficients of one concrete (classical or regularised) problem.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub a: Arc<dyn TimeCoefficient>,
    pub q: Arc<dyn TimeCoefficient>,
    pub envelope: Option<Arc<dyn TimeCoefficient>>,
    /// Mollifier width, `None` for direct evaluation.
    pub omega: Option<f64>,
}

impl CoefficientSet {
    /// Direct evaluation; fails when any coefficient carries deltas.
    pub fn classical(p: &CauchyProblem) -> Result<Self> {
        let envelope: Option<Coef> = match p.forcing.as_ref().and_then(|f| f.envelope()) {
            Some(e) => Some(Arc::new(e.classical()?)),
            None => None,
        };
        Ok(Self {
            a: Arc::new(p.a.classical()?),
            q: Arc::new(p.q.classical()?),
            envelope,
            omega: None,
        })
    }

    /// `a ∗ ψ_w`, `q ∗ ψ_w`; a forcing envelope is mollified only when it carries deltas.
    pub fn regularized(p: &CauchyProblem, psi: Mollifier, w: f64) -> Result<Self> {
        let envelope: Option<Coef> = match p.forcing.as_ref().and_then(|f| f.envelope()) {
            Some(e) if e.has_deltas() => Some(Arc::new(RegularizedCoefficient::new(Arc::new(e.clone()), psi, w)?)),
            Some(e) => Some(Arc::new(e.classical()?)),
            None => None,
        };
        Ok(Self {
            a: Arc::new(RegularizedCoefficient::new(Arc::new(p.a.clone()), psi, w)?),
            q: Arc::new(RegularizedCoefficient::new(Arc::new(p.q.clone()), psi, w)?),
            envelope,
            omega: Some(w),
        })
    }

    fn mode_ode(&self, p: &CauchyProblem, xi: SpectralIndex, c: Component) -> Result<ModeODE> {
        ModeODE::new(
            nu_squared(xi, p.params),
            self.a.clone(),
            self.q.clone(),
            p.variant,
            p.mode_forcing(xi, c, &self.envelope),
        )
    }
}

/// `∂²ₜu(t)` read off the equation: `∂²ₜû_ξ = −ν²κ(t)û_ξ + f̂_ξ(t)` per mode.
pub fn equation_second_derivative(p: &CauchyProblem, coeffs: &CoefficientSet, t: f64, u: &SpectralField) -> Result<SpectralField> {
    let mut out = SpectralField::zeros(p.params, p.trunc.clone());
    for (xi, c) in p.modes() {
        let ode = coeffs.mode_ode(p, xi, c)?;
        let v = u.get(xi, c) * (-ode.nu2() * ode.kappa(t, Side::Right)) + ode.forcing_value(t, Side::Right);
        if v != Complex64::new(0.0, 0.0) {
            out.set(xi, c, v)?;
        }
    }
    Ok(out)
}

struct ModeRun {
    states: Vec<ModeState>,
    trace: EnergyTrace,
}

/// Solves every mode of `p` with the given coefficients.
pub fn solve_with(p: &CauchyProblem, coeffs: &CoefficientSet, cfg: &IntegratorConfig, out_times: &[f64]) -> Result<Solution> {
    p.validate()?;
    cfg.validate()?;
    check_out_times(out_times, p.horizon)?;
    let modes = p.modes();
    let runs: Vec<Result<ModeRun>> = modes
        .par_iter()
        .map(|&(xi, c)| {
            let ode = coeffs.mode_ode(p, xi, c)?;
            let (v0, v1) = (p.u0.get(xi, c), p.u1.get(xi, c));
            let nu = ode.nu();
            if v0 == Complex64::new(0.0, 0.0) && v1 == Complex64::new(0.0, 0.0) && ode.forcing().is_none() {
                let zero = Complex64::new(0.0, 0.0);
                let states: Vec<ModeState> = out_times.iter().map(|&t| ModeState::from_data(t, nu, zero, zero)).collect();
                let trace = EnergyTrace { points: out_times.iter().map(|&t| (t, 0.0)).collect() };
                return Ok(ModeRun { states, trace });
            }
            let sol = integrate_mode(&ode, v0, v1, out_times, cfg).map_err(|e| Error::Mode {
                j: xi.j,
                n: xi.n,
                component: c.number(),
                source: Box::new(e),
            })?;
            Ok(ModeRun {
                states: sol.states,
                trace: sol.trace,
            })
        })
        .collect();

    let mut u: Vec<SpectralField> = out_times.iter().map(|_| SpectralField::zeros(p.params, p.trunc.clone())).collect();
    let mut du = u.clone();
    let mut traces = BTreeMap::new();
    for (&(xi, c), run) in modes.iter().zip(runs) {
        let run = run?;
        let nu = nu_squared(xi, p.params).sqrt();
        for (k, (&t, s)) in out_times.iter().zip(&run.states).enumerate() {
            let (v, dv) = if t == 0.0 {
                (p.u0.get(xi, c), p.u1.get(xi, c))
            } else {
                (s.v_hat(nu), s.dv_hat())
            };
            if v != Complex64::new(0.0, 0.0) {
                u[k].set(xi, c, v)?;
            }
            if dv != Complex64::new(0.0, 0.0) {
                du[k].set(xi, c, dv)?;
            }
        }
        traces.insert((xi, c), run.trace);
    }
    Ok(Solution {
        times: out_times.to_vec(),
        u,
        du,
        traces,
        omega: coeffs.omega,
    })
}

/// Solves with delta-free coefficients evaluated directly.
pub fn solve_classical(p: &CauchyProblem, cfg: &IntegratorConfig, out_times: &[f64]) -> Result<Solution> {
    p.validate()?;
    solve_with(p, &CoefficientSet::classical(p)?, cfg, out_times)
}

/// Solves the problem regularised at `ε`: coefficients are mollified at width `ω(ε)`.
pub fn solve_regularized(
    p: &CauchyProblem,
    psi: Mollifier,
    schedule: OmegaSchedule,
    eps: f64,
    cfg: &IntegratorConfig,
    out_times: &[f64],
) -> Result<Solution> {
    let w = schedule.omega(eps)?;
    solve_regularized_width(p, psi, w, cfg, out_times)
}

/// Solves the problem regularised at mollifier width `w`.
pub fn solve_regularized_width(
    p: &CauchyProblem,
    psi: Mollifier,
    w: f64,
    cfg: &IntegratorConfig,
    out_times: &[f64],
) -> Result<Solution> {
    p.validate()?;
    if w > p.horizon.min(1.0) / 2.0 {
        log::warn!("mollifier width {w} exceeds half of min(T, 1); regularisation smears across the interval");
    }
    solve_with(p, &CoefficientSet::regularized(p, psi, w)?, cfg, out_times)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    /// `‖u(t)‖_{H^{1+s}}`.
    pub h_norm_1plus_s: f64,
    /// `‖∂ₜu(t)‖_{H^s}`.
    pub h_norm_s: f64,
}

pub fn solution_norms(sol: &Solution, s: f64) -> Vec<NormSample> {
    sol.times
        .iter()
        .zip(sol.u.iter().zip(&sol.du))
        .map(|(&t, (u, du))| NormSample {
            t,
            h_norm_1plus_s: sobolev_norm(u, 1.0 + s),
            h_norm_s: sobolev_norm(du, s),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateCheck {
    pub passed: bool,
    /// `max_t (‖u‖²_{H^{1+s}} + ‖∂ₜu‖²_{H^s}) / (‖u₀‖²_{H^{1+s}} + ‖u₁‖²_{H^s} + Σ_ξ ν^{2s}∫|f̂_ξ|²)`.
    pub measured_c: f64,
    /// Largest per-mode Gronwall constant over participating modes.
    pub theoretical_c: f64,
}

/// Checks the energy estimate for a classical solve.
///
/// The forcing enters through `Σ_ξ ν^{2s} ∫₀ᵀ |f̂_ξ|²`, integrated per mode.
pub fn estimate_check(sol: &Solution, p: &CauchyProblem) -> Result<EstimateCheck> {
    p.validate()?;
    let coeffs = CoefficientSet::classical(p)?;
    let s = p.sobolev_order;
    let t_max = sol.times.iter().copied().fold(0.0, f64::max);
    let mut rhs = sobolev_norm(&p.u0, 1.0 + s).powi(2) + sobolev_norm(&p.u1, s).powi(2);
    let mut theoretical: f64 = 0.0;
    for (xi, c) in p.modes() {
        let ode = coeffs.mode_ode(p, xi, c)?;
        let participates = ode.forcing().is_some() || p.u0.get(xi, c).norm_sqr() + p.u1.get(xi, c).norm_sqr() > 0.0;
        if !participates {
            continue;
        }
        rhs += ode.nu2().powf(s) * ode.forcing_energy(0.0, t_max);
        theoretical = theoretical.max(estimate_constant(&ode, t_max));
    }
    let lhs = sol
        .u
        .iter()
        .zip(&sol.du)
        .map(|(u, du)| sobolev_norm(u, 1.0 + s).powi(2) + sobolev_norm(du, s).powi(2))
        .fold(0.0, f64::max);
    if rhs == 0.0 {
        return Ok(EstimateCheck {
            passed: lhs == 0.0,
            measured_c: if lhs == 0.0 { 0.0 } else { f64::INFINITY },
            theoretical_c: theoretical,
        });
    }
    let measured_c = lhs / rhs;
    Ok(EstimateCheck {
        passed: measured_c <= theoretical * (1.0 + ESTIMATE_SLACK),
        measured_c,
        theoretical_c: theoretical,
    })
}

/// Largest fraction over output times of the energy `ν^{2(1+s)}|û|² + ν^{2s}|∂ₜû|²`
/// carried by the top Landau shell `n = n_max`.
pub fn top_shell_fraction(sol: &Solution, s: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (u, du) in sol.u.iter().zip(&sol.du) {
        let n_max = u.truncation().n_max;
        let p = u.params();
        let weighted = |f: &SpectralField, order: f64, top_only: bool| -> f64 {
            f.iter()
                .filter(|(xi, _)| !top_only || xi.n == n_max)
                .map(|(xi, m)| nu_squared(xi, p).powf(order) * m.norm_sqr())
                .sum()
        };
        let total = weighted(u, 1.0 + s, false) + weighted(du, s, false);
        if total > 0.0 {
            worst = worst.max((weighted(u, 1.0 + s, true) + weighted(du, s, true)) / total);
        }
    }
    worst
}

/// CSV with columns `t,j,n,component,re_u,im_u,re_du,im_du`.
pub fn write_solution_csv<W: Write>(sol: &Solution, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,j,n,component,re_u,im_u,re_du,im_du")?;
    for (k, &t) in sol.times.iter().enumerate() {
        let trunc = sol.u[k].truncation();
        for xi in trunc.indices() {
            for &c in trunc.components() {
                let (u, du) = (sol.u[k].get(xi, c), sol.du[k].get(xi, c));
                writeln!(
                    w,
                    "{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                    t,
                    xi.j,
                    xi.n,
                    c.number(),
                    u.re,
                    u.im,
                    du.re,
                    du.im
                )?;
            }
        }
    }
    Ok(())
}

/// CSV with columns `t,h_norm_1plus_s,h_norm_s`.
pub fn write_norms_csv<W: Write>(norms: &[NormSample], mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,h_norm_1plus_s,h_norm_s")?;
    for n in norms {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", n.t, n.h_norm_1plus_s, n.h_norm_s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_solver::closed_form_constant;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn problem(a: TimeDistribution, q: TimeDistribution, trunc: TruncationSpec, variant: Variant) -> CauchyProblem {
        let params = BasisParams::new(1.0).unwrap();
        let horizon = a.horizon();
        CauchyProblem {
            variant,
            params,
            horizon,
            a,
            q,
            forcing: None,
            u0: SpectralField::zeros(params, trunc.clone()),
            u1: SpectralField::zeros(params, trunc.clone()),
            sobolev_order: 0.0,
            trunc,
        }
    }

    fn constant_problem(a: f64, q: f64, horizon: f64, trunc: TruncationSpec) -> CauchyProblem {
        problem(
            TimeDistribution::constant(horizon, a).unwrap().with_lower_bound(a).unwrap(),
            TimeDistribution::constant(horizon, q).unwrap(),
            trunc,
            Variant::CPa,
        )
    }

    #[test]
    fn cosine_mode_example() {
        let mut p = constant_problem(1.0, 0.0, 4.0, TruncationSpec::component_one(2, 2));
        p.u0.set(SpectralIndex::new(0, 0), Component::One, c(1.0, 0.0)).unwrap();
        let sol = solve_classical(&p, &IntegratorConfig::default(), &[0.0, PI, 4.0]).unwrap();
        assert_eq!(sol.u[0], p.u0);
        assert_eq!(sol.du[0], p.u1);
        assert!((sol.u[1].get(SpectralIndex::new(0, 0), Component::One) - c(-1.0, 0.0)).norm() < 1e-8);

        let norms = solution_norms(&sol, 0.0);
        assert!((norms[2].h_norm_1plus_s - 4f64.cos().abs()).abs() < 1e-8);
        assert!((norms[2].h_norm_s - 4f64.sin().abs()).abs() < 1e-8);
        let check = estimate_check(&sol, &p).unwrap();
        assert!(check.passed && check.measured_c <= 1.0 + 1e-6, "{check:?}");
    }

    #[test]
    fn sine_mode_example() {
        let mut p = constant_problem(1.0, 0.0, 3.0, TruncationSpec::component_one(1, 2));
        let xi = SpectralIndex::new(0, 1);
        p.u1.set(xi, Component::One, c(1.0, 0.0)).unwrap();
        let ts = uniform_grid(3.0, 31);
        let sol = solve_classical(&p, &IntegratorConfig::default(), &ts).unwrap();
        for (t, u) in ts.iter().zip(&sol.u) {
            let expect = (3f64.sqrt() * t).sin() / 3f64.sqrt();
            assert!((u.get(xi, Component::One) - c(expect, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn forced_mode_matches_oracle() {
        let mut p = constant_problem(2.0, 0.5, 3.0, TruncationSpec::both(1, 1));
        let xi = SpectralIndex::new(1, 1);
        let amp = c(0.5, -1.0);
        p.forcing = Some(
            SpectralForcing::new(
                vec![ForcingTerm { index: xi, component: Component::One, amplitude: amp.into(), frequency: 1.1 }],
                None,
            )
            .unwrap(),
        );
        let ts = uniform_grid(3.0, 61);
        let sol = solve_classical(&p, &IntegratorConfig::default(), &ts).unwrap();
        let nu2 = nu_squared(xi, p.params);
        for (t, u) in ts.iter().zip(&sol.u) {
            let (v, _) = closed_form_constant(2.0, 0.5, nu2, Variant::CPa, c(0.0, 0.0), c(0.0, 0.0), *t, Some((amp, 1.1))).unwrap();
            assert!((u.get(xi, Component::One) - v).norm() < 1e-7);
            assert_eq!(u.get(xi, Component::Two), c(0.0, 0.0));
        }
        assert!(estimate_check(&sol, &p).unwrap().passed);
        let f = p.forcing.as_ref().unwrap().eval(0.5, p.params, &p.trunc).unwrap();
        assert!((f.get(xi, Component::One) - amp * Complex64::from_polar(1.0, 0.55)).norm() < 1e-15);
    }

    #[test]
    fn modes_decouple() {
        let a = TimeDistribution::from_fn(2.0, 8, 10, |t| 2.0 + t.sin()).unwrap().with_lower_bound(1.0).unwrap();
        let q = TimeDistribution::constant(2.0, 1.0).unwrap();
        let trunc = TruncationSpec::both(2, 3);
        let mut full = problem(a.clone(), q.clone(), trunc.clone(), Variant::CPa);
        let entries = [
            (SpectralIndex::new(0, 0), Component::One, c(1.0, 0.5)),
            (SpectralIndex::new(2, 1), Component::Two, c(-0.3, 0.0)),
            (SpectralIndex::new(1, 3), Component::One, c(0.0, 0.7)),
        ];
        for (xi, comp, v) in entries {
            full.u0.set(xi, comp, v).unwrap();
            full.u1.set(xi, comp, v * 0.5).unwrap();
        }
        let ts = uniform_grid(2.0, 11);
        let cfg = IntegratorConfig::default();
        let whole = solve_classical(&full, &cfg, &ts).unwrap();
        for (xi, comp, v) in entries {
            let mut single = problem(a.clone(), q.clone(), trunc.clone(), Variant::CPa);
            single.u0.set(xi, comp, v).unwrap();
            single.u1.set(xi, comp, v * 0.5).unwrap();
            let part = solve_classical(&single, &cfg, &ts).unwrap();
            for k in 0..ts.len() {
                assert!((whole.u[k].get(xi, comp) - part.u[k].get(xi, comp)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn variants_agree_without_potential() {
        let a = TimeDistribution::from_fn(2.0, 8, 10, |t| 1.5 + 0.5 * (3.0 * t).cos()).unwrap().with_lower_bound(0.9).unwrap();
        let q = TimeDistribution::constant(2.0, 0.0).unwrap();
        let trunc = TruncationSpec::component_one(1, 3);
        let mut pa = problem(a.clone(), q.clone(), trunc.clone(), Variant::CPa);
        pa.u0.set(SpectralIndex::new(1, 2), Component::One, c(1.0, 0.0)).unwrap();
        let mut pb = pa.clone();
        pb.variant = Variant::CPb;
        let ts = uniform_grid(2.0, 21);
        let cfg = IntegratorConfig::default();
        let (sa, sb) = (solve_classical(&pa, &cfg, &ts).unwrap(), solve_classical(&pb, &cfg, &ts).unwrap());
        for k in 0..ts.len() {
            assert!(plancherel(&sa.u[k].sub(&sb.u[k]).unwrap()) <= 1e-10);
        }
    }

    fn plancherel(f: &SpectralField) -> f64 {
        crate::h_fourier::plancherel_norm(f)
    }

    #[test]
    fn classical_rejects_deltas_and_regularized_runs() {
        let trunc = TruncationSpec::component_one(1, 2);
        let a = TimeDistribution::constant(2.0, 1.0).unwrap().with_lower_bound(1.0).unwrap();
        let q = TimeDistribution::delta(2.0, 1.0, 1.0).unwrap();
        let mut p = problem(a, q, trunc, Variant::CPa);
        p.u0.set(SpectralIndex::new(0, 0), Component::One, c(1.0, 0.0)).unwrap();
        let cfg = IntegratorConfig::default();
        let ts = default_output_grid(2.0);
        assert!(matches!(solve_classical(&p, &cfg, &ts), Err(Error::Precondition(_))));
        let sol = solve_regularized(&p, Mollifier::standard(), OmegaSchedule::Log, 2f64.powi(-8), &cfg, &ts).unwrap();
        assert!(solution_norms(&sol, 0.0).iter().all(|n| n.h_norm_1plus_s.is_finite() && n.h_norm_s.is_finite()));

        // Same trajectory on a coarser grid.
        let coarse: Vec<f64> = ts.iter().copied().step_by(20).collect();
        let sol2 = solve_regularized(&p, Mollifier::standard(), OmegaSchedule::Log, 2f64.powi(-8), &cfg, &coarse).unwrap();
        for (k, u) in sol2.u.iter().enumerate() {
            assert!(plancherel(&u.sub(&sol.u[20 * k]).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn validation_errors() {
        let trunc = TruncationSpec::component_one(1, 1);
        let p = problem(
            TimeDistribution::constant(2.0, 1.0).unwrap(),
            TimeDistribution::constant(2.0, 0.0).unwrap(),
            trunc.clone(),
            Variant::CPa,
        );
        assert!(p.validate().is_err());
        let p = constant_problem(1.0, -1.0, 2.0, trunc);
        assert!(p.validate().is_err());
        let p = constant_problem(1.0, 0.0, 2.0, TruncationSpec::component_one(1, 1));
        assert!(solve_classical(&p, &IntegratorConfig::default(), &[0.5, 0.2]).is_err());
        assert!(solve_classical(&p, &IntegratorConfig::default(), &[3.0]).is_err());
    }

    #[test]
    fn zero_data_passes_estimate() {
        let p = constant_problem(1.0, 0.0, 2.0, TruncationSpec::component_one(1, 1));
        let sol = solve_classical(&p, &IntegratorConfig::default(), &default_output_grid(2.0)).unwrap();
        let check = estimate_check(&sol, &p).unwrap();
        assert!(check.passed);
        assert_eq!(check.measured_c, 0.0);
        assert!(solution_norms(&sol, 0.5).iter().all(|n| n.h_norm_1plus_s == 0.0 && n.h_norm_s == 0.0));
    }

    #[test]
    fn csv_exports() {
        let mut p = constant_problem(1.0, 0.0, 1.0, TruncationSpec::both(0, 1));
        p.u0.set(SpectralIndex::new(0, 0), Component::One, c(1.0, 0.0)).unwrap();
        let sol = solve_classical(&p, &IntegratorConfig::default(), &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_solution_csv(&sol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,j,n,component,re_u,im_u,re_du,im_du");
        assert_eq!(lines.len(), 1 + 2 * 2 * 2);
        let mut buf = Vec::new();
        write_norms_csv(&solution_norms(&sol, 0.0), &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,h_norm_1plus_s,h_norm_s\n"));
        assert!(top_shell_fraction(&sol, 0.0) < 1e-20);
    }
}
