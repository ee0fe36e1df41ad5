//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Runs as a plain binary (`harness = false`) so the verdict lines are always printed:
//! `cargo test -p landau-vws --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use landau_vws::cauchy_engine::{
    default_output_grid, estimate_check, solve_classical, uniform_grid, CauchyProblem, ForcingTerm, SpectralForcing,
};
use landau_vws::coefficients::{FnCoefficient, Mollifier, OmegaSchedule, TimeDistribution};
use landau_vws::h_fourier::{forward_transform, inverse_transform, plancherel_norm, PhysicalField, SpectralField, TruncationSpec};
use landau_vws::mode_solver::{closed_form_constant, integrate_mode, IntegratorConfig, ModeODE, Variant};
use landau_vws::spectral_basis::{
    eigen_residual, laguerre_recurrence, laguerre_sum, nu_squared, BasisParams, Component, NormalizedBasis, SpectralIndex,
};
use landau_vws::vws_harness::{
    check_consistency, check_uniqueness_stability, fit_moderateness, run_net, scenario, EpsilonGrid, NetDiagnostics,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn laguerre_cross_validation() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut worst = 0.0f64;
    for n in 0..=20u32 {
        for alpha in 0..=10 {
            let alpha = alpha as f64;
            for i in 0..50 {
                let t = 50.0 * i as f64 / 49.0;
                let exact = laguerre_sum(n, alpha, t).map_err(e)?;
                let rec = laguerre_recurrence(n, alpha, t);
                let rel = if exact == 0.0 { rec.abs() } else { ((rec - exact) / exact).abs() };
                worst = worst.max(rel);
            }
        }
    }
    Ok((worst <= TOL, format!("max rel diff {worst:.3e} (tol {TOL:e})")))
}

fn orthonormality() -> Outcome {
    const TOL: f64 = 1e-6;
    let mut worst = 0.0f64;
    for b in [0.5, 1.0, 2.0] {
        let basis = NormalizedBasis::with_default_grid(BasisParams::new(b).map_err(e)?).map_err(e)?;
        let weights: Vec<f64> = basis.grid().points().map(|(_, _, w)| w).collect();
        let mut samples = Vec::new();
        for j in 0..=6 {
            for n in 0..=6 {
                samples.push(basis.samples(Component::One, SpectralIndex::new(j, n)).map_err(e)?);
            }
        }
        for (p, sp) in samples.iter().enumerate() {
            for (q, sq) in samples.iter().enumerate().skip(p) {
                let g: Complex64 = sp.iter().zip(sq).zip(&weights).map(|((a, b), w)| a * b.conj() * w).sum();
                let target = if p == q { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
    }
    Ok((worst <= TOL, format!("max |G - I| {worst:.3e} over B in {{0.5, 1, 2}} (tol {TOL:e})")))
}

fn eigen_residuals() -> Outcome {
    const TOL: f64 = 1e-3;
    const MIN_ORDER: f64 = 1.8;
    let params = BasisParams::new(1.0).map_err(e)?;
    let basis = NormalizedBasis::with_default_grid(params).map_err(e)?;
    let grid = basis.grid();
    let mut pass = true;
    let mut detail = Vec::new();
    for xi in [SpectralIndex::new(0, 0), SpectralIndex::new(0, 2)] {
        let r1 = eigen_residual(Component::One, xi, params, grid, 1e-3).map_err(e)?;
        let r2 = eigen_residual(Component::One, xi, params, grid, 5e-4).map_err(e)?;
        let order = (r1 / r2).log2();
        pass &= r1 <= TOL && order >= MIN_ORDER;
        detail.push(format!("e1{xi}: r={r1:.3e} order={order:.3}"));
    }
    for xi in [SpectralIndex::new(0, 0), SpectralIndex::new(2, 1)] {
        let r = eigen_residual(Component::Two, xi, params, grid, 1e-3).map_err(e)?;
        detail.push(format!("e2{xi} (reported): r={r:.3e}"));
    }
    Ok((pass, format!("{} (tol {TOL:e}, order >= {MIN_ORDER})", detail.join(", "))))
}

fn plancherel_round_trip() -> Outcome {
    const TOL: f64 = 1e-6;
    let params = BasisParams::new(1.0).map_err(e)?;
    let basis = Arc::new(NormalizedBasis::with_default_grid(params).map_err(e)?);
    let trunc = TruncationSpec::component_one(4, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_norm, mut worst_coeff) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let mut fh = SpectralField::zeros(params, trunc.clone());
        for xi in trunc.indices() {
            fh.set(xi, Component::One, rand_c(&mut rng)).map_err(e)?;
        }
        let (b, g) = (basis.clone(), fh.clone());
        let phys = PhysicalField::from_fn(move |x, y| inverse_transform(&g, &b, x, y).expect("inverse transform"));
        let l2 = phys.l2_norm(&basis).map_err(e)?;
        worst_norm = worst_norm.max((plancherel_norm(&fh) - l2).abs());
        let back = forward_transform(&phys, &trunc, &basis).map_err(e)?;
        for xi in trunc.indices() {
            worst_coeff = worst_coeff.max((back.get(xi, Component::One) - fh.get(xi, Component::One)).norm());
        }
    }
    Ok((
        worst_norm <= TOL && worst_coeff <= TOL,
        format!("plancherel err {worst_norm:.3e}, round-trip err {worst_coeff:.3e} (tol {TOL:e})"),
    ))
}

fn constant_coefficient_oracle() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ts = uniform_grid(10.0, 101);
    let cfg = IntegratorConfig::default();
    let (mut worst_rel, mut worst_energy) = (0.0f64, 0.0f64);
    for draw in 0..50 {
        let a0 = rng.gen_range(1.0..5.0);
        let q0 = rng.gen_range(0.0..5.0);
        let nu2 = rng.gen_range(1..=41) as f64;
        let variant = if draw % 2 == 0 { Variant::CPa } else { Variant::CPb };
        let (v0, v1) = (rand_c(&mut rng), rand_c(&mut rng));
        let ode = ModeODE::new(
            nu2,
            Arc::new(FnCoefficient::constant(a0)),
            Arc::new(FnCoefficient::constant(q0)),
            variant,
            None,
        )
        .map_err(e)?;
        let sol = integrate_mode(&ode, v0, v1, &ts, &cfg).map_err(e)?;
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for st in &sol.states {
            let (v, _) = closed_form_constant(a0, q0, nu2, variant, v0, v1, st.t, None).map_err(e)?;
            err = err.max((st.v_hat(ode.nu()) - v).norm());
            scale = scale.max(v.norm());
        }
        worst_rel = worst_rel.max(err / scale);
        worst_energy = worst_energy.max(sol.trace.max_relative_drift());
    }
    Ok((
        worst_rel <= TOL && worst_energy <= TOL,
        format!("max rel err {worst_rel:.3e}, max energy drift {worst_energy:.3e} over 50 draws (tol {TOL:e})"),
    ))
}

/// `c0 + Σ_k c_k cos(k t + φ_k)` with random amplitudes bounded by `amp`.
fn trig_poly(rng: &mut ChaCha8Rng, amp: f64) -> (Vec<(f64, f64)>, f64) {
    let terms: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(0.0..amp), rng.gen_range(0.0..std::f64::consts::TAU))).collect();
    let total = terms.iter().map(|t| t.0).sum();
    (terms, total)
}

fn eval_trig(terms: &[(f64, f64)], c0: f64, t: f64) -> f64 {
    c0 + terms.iter().enumerate().map(|(k, (a, ph))| a * ((k + 1) as f64 * t + ph).cos()).sum::<f64>()
}

fn gronwall_estimate() -> Outcome {
    const T: f64 = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let params = BasisParams::new(1.0).map_err(e)?;
    let trunc = TruncationSpec::component_one(2, 8);
    let cfg = IntegratorConfig::default();
    let ts = default_output_grid(T);
    let mut passed = 0;
    let mut worst = 0.0f64;
    for draw in 0..20 {
        let (at, asum) = trig_poly(&mut rng, 1.0);
        let a_mean = 1.1 + asum + rng.gen_range(0.0..2.0);
        let (qt, qsum) = trig_poly(&mut rng, 0.6);
        let q_mean = rng.gen_range(qsum + 0.05..5.0 - qsum - 0.05);
        let a = TimeDistribution::from_fn(T, 8, 10, move |t| eval_trig(&at, a_mean, t))
            .and_then(|d| d.with_lower_bound(1.0))
            .map_err(e)?;
        let q = TimeDistribution::from_fn(T, 8, 10, move |t| eval_trig(&qt, q_mean, t)).map_err(e)?;
        let mut u0 = SpectralField::zeros(params, trunc.clone());
        let mut u1 = SpectralField::zeros(params, trunc.clone());
        for xi in trunc.indices() {
            let decay = nu_squared(xi, params).powf(-1.0);
            u0.set(xi, Component::One, rand_c(&mut rng) * decay).map_err(e)?;
            u1.set(xi, Component::One, rand_c(&mut rng) * decay).map_err(e)?;
        }
        let p = CauchyProblem {
            variant: if draw % 2 == 0 { Variant::CPa } else { Variant::CPb },
            params,
            horizon: T,
            a,
            q,
            forcing: None,
            u0,
            u1,
            sobolev_order: [0.0, 0.5, 1.0][draw % 3],
            trunc: trunc.clone(),
        };
        let sol = solve_classical(&p, &cfg, &ts).map_err(e)?;
        let check = estimate_check(&sol, &p).map_err(e)?;
        worst = worst.max(check.measured_c / check.theoretical_c);
        passed += usize::from(check.passed);
    }
    Ok((passed == 20, format!("{passed}/20 passed, max measured/theoretical {worst:.3e} (slack 1.1)")))
}

fn forced_oracle() -> Outcome {
    const TOL: f64 = 1e-7;
    const T: f64 = 5.0;
    let params = BasisParams::new(1.0).map_err(e)?;
    let trunc = TruncationSpec::component_one(2, 2);
    let xi = SpectralIndex::new(1, 1);
    let (a0, q0, amp, sigma) = (1.5, 1.0, c(1.0, 0.5), 0.7);
    let p = CauchyProblem {
        variant: Variant::CPa,
        params,
        horizon: T,
        a: TimeDistribution::constant(T, a0).and_then(|d| d.with_lower_bound(a0)).map_err(e)?,
        q: TimeDistribution::constant(T, q0).map_err(e)?,
        forcing: Some(
            SpectralForcing::new(
                vec![ForcingTerm { index: xi, component: Component::One, amplitude: amp.into(), frequency: sigma }],
                None,
            )
            .map_err(e)?,
        ),
        u0: SpectralField::zeros(params, trunc.clone()),
        u1: SpectralField::zeros(params, trunc.clone()),
        sobolev_order: 0.0,
        trunc,
    };
    let ts = uniform_grid(T, 101);
    let sol = solve_classical(&p, &IntegratorConfig::default(), &ts).map_err(e)?;
    let nu2 = nu_squared(xi, params);
    let mut worst = 0.0f64;
    for (k, &t) in ts.iter().enumerate() {
        let (v, dv) = closed_form_constant(a0, q0, nu2, Variant::CPa, c(0.0, 0.0), c(0.0, 0.0), t, Some((amp, sigma))).map_err(e)?;
        worst = worst.max((sol.u[k].get(xi, Component::One) - v).norm());
        worst = worst.max((sol.du[k].get(xi, Component::One) - dv).norm());
        for (other, comp, val) in sol.u[k].nonzero_entries() {
            if other != xi || comp != Component::One {
                worst = worst.max(val.norm());
            }
        }
    }
    Ok((worst <= TOL, format!("max |numeric - oracle| {worst:.3e} (tol {TOL:e})")))
}

fn consistency() -> Outcome {
    const POWER_RATIO: f64 = 0.1;
    const LOG_RATIO: f64 = 0.5;
    let p = scenario("regular").map_err(e)?;
    let grid = EpsilonGrid::powers_of_two(2, 10).map_err(e)?;
    let cfg = IntegratorConfig::default();
    let ts = default_output_grid(p.horizon);
    let pw = check_consistency(&p, Mollifier::standard(), OmegaSchedule::Power(1.0), &grid, &cfg, &ts).map_err(e)?;
    let lg = check_consistency(&p, Mollifier::standard(), OmegaSchedule::Log, &grid, &cfg, &ts).map_err(e)?;
    let pass = pw.inversions <= 1 && pw.ratio <= POWER_RATIO && lg.ratio <= LOG_RATIO;
    Ok((
        pass,
        format!(
            "power(1): inversions {} ratio {:.3e} (<= {POWER_RATIO}); log: ratio {:.3e} (<= {LOG_RATIO})",
            pw.inversions, pw.ratio, lg.ratio
        ),
    ))
}

fn moderateness() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut p = scenario("ex1").map_err(e)?;
    p.a = TimeDistribution::constant(p.horizon, 1.0).and_then(|d| d.with_lower_bound(1.0)).map_err(e)?;
    let grid = EpsilonGrid::default();
    let net = run_net(&p, Mollifier::standard(), OmegaSchedule::Log, &grid, &IntegratorConfig::default(), &default_output_grid(p.horizon))
        .map_err(e)?;
    let failed = net.diagnostics.failed();
    let rep = fit_moderateness(&net.diagnostics).map_err(e)?;
    let finite = rep.exponents.iter().all(|x| x.n_hat.is_finite());
    let spread = rep.exponents.iter().map(|x| (x.first_half_slope - x.second_half_slope).abs()).fold(0.0, f64::max);

    let n_true = 1.75;
    let eps = grid.values();
    let sups: Vec<[f64; 3]> = eps.iter().map(|&x| [2.0 * x.powf(-n_true), 0.3 * x.powf(-n_true - 1.0), 5.0 * x.powf(-n_true - 2.0)]).collect();
    let syn = fit_moderateness(&NetDiagnostics::synthetic(0.0, eps, &sups)).map_err(e)?;
    let syn_err = (0..3).map(|k| (syn.exponent(k).unwrap_or(f64::NAN) - (n_true + k as f64)).abs()).fold(0.0, f64::max);

    let exps: Vec<String> = rep.exponents.iter().map(|x| format!("{:.4}", x.n_hat)).collect();
    Ok((
        failed == 0 && rep.pass && finite && syn_err <= TOL,
        format!(
            "{}/{} solves finished, N = [{}], max half-grid spread {spread:.3e} (< 0.5), synthetic err {syn_err:.3e} (tol {TOL:e})",
            eps.len() - failed,
            eps.len(),
            exps.join(", ")
        ),
    ))
}

fn uniqueness() -> Outcome {
    const TOL: f64 = 1e-10;
    let p = scenario("regular").map_err(e)?;
    let grid = EpsilonGrid::default();
    let cfg = IntegratorConfig::default();
    let ts = default_output_grid(p.horizon);
    let shifted = Mollifier::shifted(0.5).map_err(e)?;
    let diff = check_uniqueness_stability(&p, Mollifier::standard(), shifted, OmegaSchedule::Log, &grid, &cfg, &ts).map_err(e)?;
    let same = check_uniqueness_stability(&p, Mollifier::standard(), Mollifier::standard(), OmegaSchedule::Log, &grid, &cfg, &ts)
        .map_err(e)?;
    let same_max = same.entries.iter().map(|x| x.value).fold(0.0, f64::max);
    let (first, last) = (diff.entries[0].value, diff.entries[diff.entries.len() - 1].value);
    Ok((
        diff.decreasing && same_max <= TOL,
        format!(
            "shifted: inversions {} ({first:.3e} -> {last:.3e}); identical: max {same_max:.3e} (tol {TOL:e})",
            diff.inversions
        ),
    ))
}

fn read_outputs(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for name in ["norms.csv", "net_diagnostics.csv", "summary.json", "config.json"] {
        let bytes = std::fs::read(dir.join(name)).map_err(|err| format!("{}: {err}", dir.join(name).display()))?;
        out.insert(name.to_string(), bytes);
    }
    Ok(out)
}

fn preset_scenarios() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_landau-vws");
    let tmp = tempfile::tempdir().map_err(e)?;
    let grid_len = EpsilonGrid::default().len();
    let samples = default_output_grid(2.0).len();
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["ex1", "ex2"] {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{name}-{rep}"));
            let status = Command::new(bin)
                .args(["scenario", name, "--out"])
                .arg(&dir)
                .output()
                .map_err(e)?;
            if !status.status.success() {
                return Ok((false, format!("{name}: exit {:?}: {}", status.status, String::from_utf8_lossy(&status.stderr))));
            }
            runs.push(read_outputs(&dir)?);
        }
        let norms_rows = runs[0]["norms.csv"].split(|&b| b == b'\n').filter(|l| !l.is_empty()).count() - 1;
        let diag_rows = runs[0]["net_diagnostics.csv"].split(|&b| b == b'\n').filter(|l| !l.is_empty()).count() - 1;
        let summary: serde_json::Value = serde_json::from_slice(&runs[0]["summary.json"]).map_err(e)?;
        let complete = norms_rows == grid_len * samples
            && diag_rows == grid_len * 3
            && summary["net"]["failed"] == 0
            && summary["moderateness"]["pass"].is_boolean();
        let identical = runs[0] == runs[1];
        pass &= complete && identical;
        detail.push(format!(
            "{name}: norms rows {norms_rows}, diagnostics rows {diag_rows}, complete {complete}, byte-identical {identical}"
        ));
    }
    Ok((pass, detail.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("laguerre cross-validation", laguerre_cross_validation),
        ("orthonormality", orthonormality),
        ("eigen-residual", eigen_residuals),
        ("plancherel and round trip", plancherel_round_trip),
        ("constant-coefficient oracle", constant_coefficient_oracle),
        ("energy estimate", gronwall_estimate),
        ("inhomogeneous manufactured solution", forced_oracle),
        ("consistency", consistency),
        ("moderateness", moderateness),
        ("uniqueness proxy", uniqueness),
        ("preset scenarios ex1 and ex2", preset_scenarios),
    ];
    let only: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|k| k != id) {
            continue;
        }
        let start = Instant::now();
        let (verdict, detail) = match run() {
            Ok((true, d)) => ("PASS", d),
            Ok((false, d)) => ("FAIL", d),
            Err(err) => ("FAIL", format!("error: {err}")),
        };
        if verdict == "FAIL" {
            failures += 1;
        }
        println!("[{verdict}] {id:>2} {name}: {detail} ({:.1}s)", start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} failed", failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
