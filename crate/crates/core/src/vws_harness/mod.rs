//! Very-weak-solution experiments: nets of regularised solutions over an
//! ε-grid, moderateness fits, consistency with classical solutions and a
//! uniqueness proxy built from two different mollifiers.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy_engine::{
    equation_second_derivative, solution_norms, solve_classical, solve_with, CauchyProblem, CoefficientSet, NormSample,
    Solution,
};
use crate::coefficients::{Mollifier, OmegaSchedule};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::h_fourier::{sobolev_norm, SpectralField};
use crate::mode_solver::IntegratorConfig;

pub use config::{scenario, ProblemConfig, SCENARIOS};
pub use report::{export_reports, Reports};

/// Largest final/initial error ratio for a "consistent" verdict.
pub const CONSISTENCY_RATIO: f64 = 0.2;

/// Largest allowed difference between half-grid slopes.
pub const SLOPE_STABILITY: f64 = 0.5;

/// Strictly decreasing ε values in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGrid {
    values: Vec<f64>,
}

impl EpsilonGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("epsilon grid is empty".into()));
        }
        if values.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::InvalidInput("epsilon values must lie in (0, 1)".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("epsilon grid must be strictly decreasing".into()));
        }
        Ok(Self { values })
    }

    /// `{2^{-k} : k = k_min..=k_max}`.
    pub fn powers_of_two(k_min: u32, k_max: u32) -> Result<Self> {
        if k_min == 0 || k_max < k_min || k_max > 60 {
            return Err(Error::InvalidInput(format!("need 1 <= k_min <= k_max <= 60, got {k_min}:{k_max}")));
        }
        Self::new((k_min..=k_max).map(|k| 0.5f64.powi(k as i32)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for EpsilonGrid {
    fn default() -> Self {
        Self::powers_of_two(2, 12).expect("default grid is valid")
    }
}

impl FromStr for EpsilonGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("epsilon grid must be 'k_min:k_max', got '{s}'"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        Self::powers_of_two(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for EpsilonGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.values.iter().map(|v| format!("{v:e}")).collect();
        write!(f, "[{}]", strs.join(", "))
    }
}

/// Number of derivative orders tracked by the net diagnostics.
pub const NET_ORDERS: usize = 3;

/// Sup-over-grid norms of one member of the net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetEntry {
    pub eps: f64,
    pub omega: f64,
    /// `[sup ‖u‖_{H^{1+s}}, sup ‖∂ₜu‖_{H^s}, sup ‖∂²ₜu‖_{H^{s−1}}]`, absent on failure.
    pub sup_norms: Option<[f64; NET_ORDERS]>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDiagnostics {
    pub s: f64,
    pub entries: Vec<NetEntry>,
}

impl NetDiagnostics {
    /// Diagnostics with prescribed sup-norms, for fits against known power laws.
    pub fn synthetic(s: f64, eps: &[f64], sup_norms: &[[f64; NET_ORDERS]]) -> Self {
        Self {
            s,
            entries: eps
                .iter()
                .zip(sup_norms)
                .map(|(&eps, &n)| NetEntry {
                    eps,
                    omega: f64::NAN,
                    sup_norms: Some(n),
                    error: None,
                })
                .collect(),
        }
    }

    pub fn failed(&self) -> usize {
        self.entries.iter().filter(|e| e.sup_norms.is_none()).count()
    }

    fn successful(&self) -> impl Iterator<Item = (f64, [f64; NET_ORDERS])> + '_ {
        self.entries.iter().filter_map(|e| e.sup_norms.map(|n| (e.eps, n)))
    }
}

/// A net of regularised solutions.
#[derive(Debug, Clone)]
pub struct NetRun {
    /// One entry per ε; `None` where the solve failed.
    pub solutions: Vec<Option<Solution>>,
    /// Norm time series per ε (empty where the solve failed).
    pub norms: Vec<Vec<NormSample>>,
    pub diagnostics: NetDiagnostics,
}

/// `sup_t ‖∂²ₜu(t)‖_{H^{s−1}}` using the equation rather than differencing.
fn second_derivative_sup(p: &CauchyProblem, coeffs: &CoefficientSet, sol: &Solution, s: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for (&t, u) in sol.times.iter().zip(&sol.u) {
        let utt = equation_second_derivative(p, coeffs, t, u)?;
        sup = sup.max(sobolev_norm(&utt, s - 1.0));
    }
    Ok(sup)
}

/// `(ε, ω(ε), solution and sup ‖∂²ₜu‖)` for one member of the net.
type NetMember = (f64, f64, Result<(Solution, f64)>);

/// Solves the regularised problem for every ε of the grid.
///
/// Individual failures are recorded in the diagnostics; the run fails only
/// when more than half of the grid fails.
pub fn run_net(
    p: &CauchyProblem,
    psi: Mollifier,
    schedule: OmegaSchedule,
    grid: &EpsilonGrid,
    cfg: &IntegratorConfig,
    out_times: &[f64],
) -> Result<NetRun> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("epsilon grid is empty".into()));
    }
    p.validate()?;
    cfg.validate()?;
    let s = p.sobolev_order;
    let results: Vec<NetMember> = grid
        .values()
        .par_iter()
        .map(|&eps| {
            let omega = match schedule.omega(eps) {
                Ok(w) => w,
                Err(e) => return (eps, f64::NAN, Err(e)),
            };
            if omega > p.horizon.min(1.0) / 2.0 {
                log::warn!("eps = {eps:e}: mollifier width {omega} exceeds half of min(T, 1)");
            }
            let run = || -> Result<(Solution, f64)> {
                let coeffs = CoefficientSet::regularized(p, psi, omega)?;
                let sol = solve_with(p, &coeffs, cfg, out_times)?;
                let utt = second_derivative_sup(p, &coeffs, &sol, s)?;
                Ok((sol, utt))
            };
            let res = run();
            match &res {
                Ok(_) => log::info!("eps = {eps:e}: omega = {omega:.6}, solved"),
                Err(err) => log::warn!("eps = {eps:e}: {err}"),
            }
            (eps, omega, res)
        })
        .collect();

    let mut solutions = Vec::with_capacity(results.len());
    let mut norms = Vec::with_capacity(results.len());
    let mut entries = Vec::with_capacity(results.len());
    for (eps, omega, res) in results {
        match res {
            Ok((sol, utt)) => {
                let series = solution_norms(&sol, s);
                let sup_u = series.iter().map(|n| n.h_norm_1plus_s).fold(0.0, f64::max);
                let sup_du = series.iter().map(|n| n.h_norm_s).fold(0.0, f64::max);
                entries.push(NetEntry {
                    eps,
                    omega,
                    sup_norms: Some([sup_u, sup_du, utt]),
                    error: None,
                });
                norms.push(series);
                solutions.push(Some(sol));
            }
            Err(e) => {
                log::warn!("eps = {eps:e}: regularised solve failed: {e}");
                entries.push(NetEntry {
                    eps,
                    omega,
                    sup_norms: None,
                    error: Some(e.to_string()),
                });
                norms.push(Vec::new());
                solutions.push(None);
            }
        }
    }
    let diagnostics = NetDiagnostics { s, entries };
    let failed = diagnostics.failed();
    if 2 * failed > grid.len() {
        let first = diagnostics
            .entries
            .iter()
            .find_map(|e| e.error.clone())
            .unwrap_or_default();
        return Err(Error::NetFailed {
            failed,
            total: grid.len(),
            first,
        });
    }
    Ok(NetRun {
        solutions,
        norms,
        diagnostics,
    })
}

/// Growth fit for one derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub k: usize,
    /// Slope `N̂` of `log sup` against `log(1/ε)`.
    pub n_hat: f64,
    pub rms_residual: f64,
    pub first_half_slope: f64,
    pub second_half_slope: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeratenessReport {
    pub exponents: Vec<ExponentEstimate>,
    pub pass: bool,
}

impl ModeratenessReport {
    pub fn exponent(&self, k: usize) -> Option<f64> {
        self.exponents.iter().find(|e| e.k == k).map(|e| e.n_hat)
    }
}

/// Slope of `ys` against `xs`, or 0 for sup-values constant to rounding.
fn growth_slope(xs: &[f64], sups: &[f64]) -> Result<(f64, f64)> {
    let max = sups.iter().copied().fold(0.0, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 || (min > 0.0 && max - min <= 1e-12 * max) {
        return Ok((0.0, 0.0));
    }
    if min <= 0.0 {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let ys: Vec<f64> = sups.iter().map(|v| v.ln()).collect();
    match fit_line(xs, &ys) {
        Ok(fit) => Ok((fit.slope, fit.rms_residual)),
        Err(Error::DegenerateFit(_)) => Ok((0.0, 0.0)),
        Err(e) => Err(e),
    }
}

/// Fits `sup ∼ ε^{−N̂}` per derivative order; passes when every slope is
/// finite and the two half-grid slopes differ by less than [`SLOPE_STABILITY`].
pub fn fit_moderateness(diag: &NetDiagnostics) -> Result<ModeratenessReport> {
    let ok: Vec<(f64, [f64; NET_ORDERS])> = diag.successful().collect();
    if ok.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "moderateness fit needs at least 4 successful epsilon values, got {}",
            ok.len()
        )));
    }
    let xs: Vec<f64> = ok.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let half = ok.len().div_ceil(2);
    let mut exponents = Vec::with_capacity(NET_ORDERS);
    for k in 0..NET_ORDERS {
        let sups: Vec<f64> = ok.iter().map(|(_, n)| n[k]).collect();
        let (n_hat, rms_residual) = growth_slope(&xs, &sups)?;
        let (first, _) = growth_slope(&xs[..half], &sups[..half])?;
        let (second, _) = growth_slope(&xs[ok.len() - half..], &sups[ok.len() - half..])?;
        let stable = n_hat.is_finite() && first.is_finite() && second.is_finite() && (first - second).abs() < SLOPE_STABILITY;
        exponents.push(ExponentEstimate {
            k,
            n_hat,
            rms_residual,
            first_half_slope: first,
            second_half_slope: second,
            stable,
        });
    }
    let pass = exponents.iter().all(|e| e.stable);
    Ok(ModeratenessReport { exponents, pass })
}

/// `sup_t (‖u − v‖_{H^{1+s}} + ‖∂ₜu − ∂ₜv‖_{H^s})` over shared output times.
pub fn solution_distance(a: &Solution, b: &Solution, s: f64) -> Result<f64> {
    if a.times != b.times {
        return Err(Error::InvalidInput("solutions live on different output grids".into()));
    }
    let mut sup: f64 = 0.0;
    for k in 0..a.times.len() {
        let du: SpectralField = a.u[k].sub(&b.u[k])?;
        let ddu: SpectralField = a.du[k].sub(&b.du[k])?;
        sup = sup.max(sobolev_norm(&du, 1.0 + s) + sobolev_norm(&ddu, s));
    }
    Ok(sup)
}

fn count_inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub eps: f64,
    pub omega: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub entries: Vec<ErrorEntry>,
    pub inversions: usize,
    /// Last error over first error along the grid.
    pub ratio: f64,
    /// At most one inversion and `ratio ≤` [`CONSISTENCY_RATIO`].
    pub consistent: bool,
}

fn regularized_distances<F>(grid: &EpsilonGrid, schedule: OmegaSchedule, f: F) -> Result<Vec<ErrorEntry>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    grid.values()
        .par_iter()
        .map(|&eps| {
            let omega = schedule.omega(eps)?;
            Ok(ErrorEntry {
                eps,
                omega,
                value: f(omega)?,
            })
        })
        .collect()
}

/// Compares the regularised net against the classical solution.
pub fn check_consistency(
    p: &CauchyProblem,
    psi: Mollifier,
    schedule: OmegaSchedule,
    grid: &EpsilonGrid,
    cfg: &IntegratorConfig,
    out_times: &[f64],
) -> Result<ConsistencyReport> {
    let classical = solve_classical(p, cfg, out_times)?;
    let s = p.sobolev_order;
    let entries = regularized_distances(grid, schedule, |w| {
        let sol = solve_with(p, &CoefficientSet::regularized(p, psi, w)?, cfg, out_times)?;
        solution_distance(&sol, &classical, s)
    })?;
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let inversions = count_inversions(&values);
    let ratio = if values[0] > 0.0 {
        values[values.len() - 1] / values[0]
    } else {
        0.0
    };
    Ok(ConsistencyReport {
        entries,
        inversions,
        ratio,
        consistent: inversions <= 1 && ratio <= CONSISTENCY_RATIO,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegligibilityReport {
    pub entries: Vec<ErrorEntry>,
    pub inversions: usize,
    /// Differences strictly decrease along the grid. This is a partial check:
    /// negligibility proper requires decay faster than every power of ε.
    pub decreasing: bool,
}

/// Builds the nets for two mollifiers and reports their distance per ε.
pub fn check_uniqueness_stability(
    p: &CauchyProblem,
    psi_a: Mollifier,
    psi_b: Mollifier,
    schedule: OmegaSchedule,
    grid: &EpsilonGrid,
    cfg: &IntegratorConfig,
    out_times: &[f64],
) -> Result<NegligibilityReport> {
    p.validate()?;
    let s = p.sobolev_order;
    let entries = regularized_distances(grid, schedule, |w| {
        let sa = solve_with(p, &CoefficientSet::regularized(p, psi_a, w)?, cfg, out_times)?;
        let sb = solve_with(p, &CoefficientSet::regularized(p, psi_b, w)?, cfg, out_times)?;
        solution_distance(&sa, &sb, s)
    })?;
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let inversions = count_inversions(&values);
    Ok(NegligibilityReport {
        entries,
        inversions,
        decreasing: inversions == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy_engine::{default_output_grid, uniform_grid};

    #[test]
    fn grid_parsing_and_validation() {
        let g = EpsilonGrid::default();
        assert_eq!(g.len(), 11);
        assert_eq!(g.values()[0], 0.25);
        assert_eq!(g.values()[10], 2f64.powi(-12));
        assert_eq!("2:5".parse::<EpsilonGrid>().unwrap().len(), 4);
        assert!("5:2".parse::<EpsilonGrid>().is_err());
        assert!(EpsilonGrid::new(vec![]).is_err());
        assert!(EpsilonGrid::new(vec![0.1, 0.2]).is_err());
        assert!(EpsilonGrid::new(vec![1.0]).is_err());
    }

    #[test]
    fn synthetic_power_laws_are_recovered() {
        let eps: Vec<f64> = EpsilonGrid::default().values().to_vec();
        let sups: Vec<[f64; 3]> = eps.iter().map(|e| [3.0 * e.powi(-2), 0.5 * e.powf(-1.5), 7.0]).collect();
        let rep = fit_moderateness(&NetDiagnostics::synthetic(0.0, &eps, &sups)).unwrap();
        assert!((rep.exponent(0).unwrap() - 2.0).abs() <= 1e-8);
        assert!((rep.exponent(1).unwrap() - 1.5).abs() <= 1e-8);
        assert_eq!(rep.exponent(2).unwrap(), 0.0);
        assert!(rep.pass);

        let too_few = NetDiagnostics::synthetic(0.0, &eps[..3], &sups[..3]);
        assert!(fit_moderateness(&too_few).is_err());
    }

    #[test]
    fn unstable_growth_fails_the_fit() {
        let eps: Vec<f64> = EpsilonGrid::default().values().to_vec();
        // Slope 0 on the first half, slope 3 on the second.
        let sups: Vec<[f64; 3]> = eps
            .iter()
            .map(|e| {
                let x = (1.0 / e).ln();
                let v = if x < 5.0 { 1.0 } else { (3.0 * (x - 5.0)).exp() };
                [v, 1.0, 1.0]
            })
            .collect();
        let rep = fit_moderateness(&NetDiagnostics::synthetic(0.0, &eps, &sups)).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn regular_net_is_stable_in_eps() {
        let p = scenario("regular").unwrap();
        let grid = EpsilonGrid::powers_of_two(4, 9).unwrap();
        let ts = uniform_grid(p.horizon, 41);
        let net = run_net(&p, Mollifier::standard(), OmegaSchedule::Power(1.0), &grid, &IntegratorConfig::default(), &ts).unwrap();
        assert_eq!(net.diagnostics.failed(), 0);
        let sups: Vec<f64> = net.diagnostics.entries.iter().map(|e| e.sup_norms.unwrap()[0]).collect();
        let (lo, hi) = sups.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!((hi - lo) / hi < 0.05, "{sups:?}");
        let rep = fit_moderateness(&net.diagnostics).unwrap();
        assert!(rep.pass && rep.exponent(0).unwrap().abs() < 0.05);
    }

    #[test]
    fn constant_coefficients_are_consistent_to_rounding() {
        let mut p = scenario("regular").unwrap();
        p.a = crate::coefficients::TimeDistribution::constant(2.0, 2.0).unwrap().with_lower_bound(2.0).unwrap();
        p.q = crate::coefficients::TimeDistribution::constant(2.0, 1.0).unwrap();
        let grid = EpsilonGrid::powers_of_two(2, 6).unwrap();
        let rep = check_consistency(
            &p,
            Mollifier::standard(),
            OmegaSchedule::Log,
            &grid,
            &IntegratorConfig::default(),
            &default_output_grid(2.0),
        )
        .unwrap();
        assert!(rep.entries.iter().all(|e| e.value <= 1e-10), "{rep:?}");
    }

    #[test]
    fn identical_mollifiers_give_identical_nets() {
        let p = scenario("ex1").unwrap();
        let grid = EpsilonGrid::powers_of_two(3, 6).unwrap();
        let psi = Mollifier::standard();
        let rep = check_uniqueness_stability(&p, psi, psi, OmegaSchedule::Log, &grid, &IntegratorConfig::default(), &uniform_grid(2.0, 21))
            .unwrap();
        assert!(rep.entries.iter().all(|e| e.value <= 1e-10));
    }

    #[test]
    fn consistency_requires_classical_problem() {
        let p = scenario("ex1").unwrap();
        let err = check_consistency(
            &p,
            Mollifier::standard(),
            OmegaSchedule::Log,
            &EpsilonGrid::default(),
            &IntegratorConfig::default(),
            &[0.0, 1.0],
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(EpsilonGrid::new(Vec::new()).is_err());
    }
}
