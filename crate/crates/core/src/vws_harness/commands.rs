//! Command runners behind the `landau-vws` binary.

use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{scenario_config, ProblemConfig};
use super::report::{export_reports, ClassicalSummary, Reports};
use super::{check_consistency, check_uniqueness_stability, fit_moderateness, run_net, EpsilonGrid};
use crate::cauchy_engine::{
    default_output_grid, estimate_check, solution_norms, solve_classical, top_shell_fraction, write_norms_csv,
    write_solution_csv, CauchyProblem,
};
use crate::coefficients::{Mollifier, OmegaSchedule};
use crate::error::{Error, Result};
use crate::h_fourier::TruncationSpec;
use crate::mode_solver::IntegratorConfig;

/// Offset of the second bump used by the uniqueness command.
pub const SHIFTED_BUMP_OFFSET: f64 = 0.5;

/// Global options shared by every command.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub eps_grid: EpsilonGrid,
    pub schedule: OmegaSchedule,
    pub tol: Option<f64>,
    pub truncation: Option<(u32, u32)>,
    /// Fills in random band-limited data when the problem has none.
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            config: None,
            out: PathBuf::from("out"),
            eps_grid: EpsilonGrid::default(),
            schedule: OmegaSchedule::Log,
            tol: None,
            truncation: None,
            seed: None,
        }
    }
}

impl RunOptions {
    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::default();
        if let Some(tol) = self.tol {
            cfg.rel_tol = tol;
            cfg.abs_tol = tol * 1e-2;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Problem from `--config`, else the named preset; `--truncation` and `--seed` applied.
    fn problem(&self, fallback: &str) -> Result<(CauchyProblem, Option<String>)> {
        let (mut cfg, name) = match &self.config {
            Some(path) => (ProblemConfig::load(path)?, None),
            None => (scenario_config(fallback)?, Some(fallback.to_string())),
        };
        if let Some((j, n)) = self.truncation {
            cfg.truncation.j_max = j;
            cfg.truncation.n_max = n;
        }
        let mut p = cfg.to_problem()?;
        if let Some(seed) = self.seed {
            if p.u0.is_zero() && p.u1.is_zero() {
                fill_random_data(&mut p, seed)?;
            }
        }
        Ok((p, name))
    }

    fn base_report(&self, command: &str, p: &CauchyProblem, scenario: Option<String>) -> Reports {
        Reports {
            command: command.to_string(),
            scenario,
            variant: Some(p.variant.to_string()),
            s: p.sobolev_order,
            schedule: Some(self.schedule.to_string()),
            eps_grid: self.eps_grid.values().to_vec(),
            ..Default::default()
        }
    }
}

/// Band-limited data with coefficients decaying like `ν^{-(2+s)}`.
pub fn fill_random_data(p: &mut CauchyProblem, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trunc: TruncationSpec = p.trunc.clone();
    for xi in trunc.indices() {
        for &c in trunc.components() {
            let nu2 = crate::spectral_basis::nu_squared(xi, p.params);
            let scale = nu2.powf(-(2.0 + p.sobolev_order) / 2.0);
            let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
            let (a, b) = (draw(), draw());
            p.u0.set(xi, c, a)?;
            p.u1.set(xi, c, b * nu2.sqrt())?;
        }
    }
    Ok(())
}

fn write_csv<F>(path: PathBuf, body: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
{
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = std::io::BufWriter::new(file);
    body(&mut w).and_then(|_| std::io::Write::flush(&mut w)).map_err(|e| Error::io(&path, e))
}

/// Classical solve: `solution.csv`, `classical_norms.csv` and the summary.
pub fn run_solve(opts: &RunOptions) -> Result<Reports> {
    let start = Instant::now();
    let (p, name) = opts.problem("regular")?;
    let cfg = opts.integrator()?;
    let times = default_output_grid(p.horizon);
    log::info!("classical solve: {} modes, T = {}", p.modes().len(), p.horizon);
    let sol = solve_classical(&p, &cfg, &times)?;
    let estimate = estimate_check(&sol, &p)?;
    std::fs::create_dir_all(&opts.out).map_err(|e| Error::io(&opts.out, e))?;
    write_csv(opts.out.join("solution.csv"), |w| write_solution_csv(&sol, w))?;
    let norms = solution_norms(&sol, p.sobolev_order);
    write_csv(opts.out.join("classical_norms.csv"), |w| write_norms_csv(&norms, w))?;
    let mut r = opts.base_report("solve", &p, name);
    r.schedule = None;
    r.eps_grid.clear();
    r.classical = Some(ClassicalSummary {
        estimate,
        top_shell_fraction: top_shell_fraction(&sol, p.sobolev_order),
    });
    r.timings.push(("total_seconds".into(), start.elapsed().as_secs_f64()));
    export_reports(&r, &opts.out)?;
    Ok(r)
}

fn net_reports(opts: &RunOptions, command: &str, p: &CauchyProblem, name: Option<String>) -> Result<Reports> {
    let start = Instant::now();
    let cfg = opts.integrator()?;
    let times = default_output_grid(p.horizon);
    let net = run_net(p, Mollifier::standard(), opts.schedule, &opts.eps_grid, &cfg, &times)?;
    let moderateness = fit_moderateness(&net.diagnostics)?;
    let mut r = opts.base_report(command, p, name);
    r.net_norms = net
        .diagnostics
        .entries
        .iter()
        .zip(net.norms)
        .filter(|(e, _)| e.sup_norms.is_some())
        .map(|(e, n)| (e.eps, n))
        .collect();
    r.net = Some(net.diagnostics);
    r.moderateness = Some(moderateness);
    r.timings.push(("net_seconds".into(), start.elapsed().as_secs_f64()));
    Ok(r)
}

/// Regularised net and moderateness fit.
pub fn run_net_command(opts: &RunOptions) -> Result<Reports> {
    let (p, name) = opts.problem("ex1")?;
    let r = net_reports(opts, "net", &p, name)?;
    export_reports(&r, &opts.out)?;
    Ok(r)
}

/// Regularised net against the classical solution.
pub fn run_consistency(opts: &RunOptions) -> Result<Reports> {
    let start = Instant::now();
    let (p, name) = opts.problem("regular")?;
    let cfg = opts.integrator()?;
    let rep = check_consistency(&p, Mollifier::standard(), opts.schedule, &opts.eps_grid, &cfg, &default_output_grid(p.horizon))?;
    let mut r = opts.base_report("consistency", &p, name);
    r.consistency = Some(rep);
    r.timings.push(("total_seconds".into(), start.elapsed().as_secs_f64()));
    export_reports(&r, &opts.out)?;
    Ok(r)
}

/// Standard against shifted bump.
pub fn run_uniqueness(opts: &RunOptions) -> Result<Reports> {
    let start = Instant::now();
    let (p, name) = opts.problem("regular")?;
    let cfg = opts.integrator()?;
    let rep = check_uniqueness_stability(
        &p,
        Mollifier::standard(),
        Mollifier::shifted(SHIFTED_BUMP_OFFSET)?,
        opts.schedule,
        &opts.eps_grid,
        &cfg,
        &default_output_grid(p.horizon),
    )?;
    let mut r = opts.base_report("uniqueness", &p, name);
    r.uniqueness = Some(rep);
    r.timings.push(("total_seconds".into(), start.elapsed().as_secs_f64()));
    export_reports(&r, &opts.out)?;
    Ok(r)
}

/// Preset scenario: net, moderateness and the preset's `config.json`.
pub fn run_scenario(name: &str, opts: &RunOptions) -> Result<Reports> {
    let mut cfg = scenario_config(name)?;
    if let Some((j, n)) = opts.truncation {
        cfg.truncation.j_max = j;
        cfg.truncation.n_max = n;
    }
    let p = cfg.to_problem()?;
    log::info!("scenario {name}: {} modes, grid {}", p.modes().len(), opts.eps_grid);
    let r = net_reports(opts, "scenario", &p, Some(name.to_string()))?;
    export_reports(&r, &opts.out)?;
    let path = opts.out.join("config.json");
    std::fs::write(&path, cfg.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_flag_validation() {
        let opts = RunOptions { tol: Some(0.5), ..Default::default() };
        assert!(opts.integrator().is_err());
        let opts = RunOptions { tol: Some(1e-8), ..Default::default() };
        assert_eq!(opts.integrator().unwrap().rel_tol, 1e-8);
    }

    #[test]
    fn seeded_data_is_reproducible() {
        let mut a = crate::vws_harness::scenario("regular").unwrap();
        a.u0 = crate::h_fourier::SpectralField::zeros(a.params, a.trunc.clone());
        let mut b = a.clone();
        fill_random_data(&mut a, 7).unwrap();
        fill_random_data(&mut b, 7).unwrap();
        assert_eq!(a.u0, b.u0);
        assert!(!a.u0.is_zero());
    }

    #[test]
    fn solve_command_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions { out: dir.path().to_path_buf(), ..Default::default() };
        let r = run_solve(&opts).unwrap();
        assert!(r.classical.unwrap().estimate.passed);
        for f in ["solution.csv", "classical_norms.csv", "summary.json", "norms.csv", "net_diagnostics.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }
}
