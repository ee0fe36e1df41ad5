use landau_vws::cauchy_engine::{equation_second_derivative, solve_with, uniform_grid, CoefficientSet};
use landau_vws::coefficients::{Mollifier, OmegaSchedule};
use landau_vws::h_fourier::{sobolev_norm, SpectralField};
use landau_vws::mode_solver::IntegratorConfig;
use landau_vws::vws_harness::{fit_moderateness, run_net, scenario, EpsilonGrid, NetDiagnostics};
use num_complex::Complex64;
use proptest::prelude::*;

/// The second derivative taken from the equation matches a five-point
/// difference of the computed `∂ₜu` at interior times.
#[test]
fn equation_second_derivative_matches_differences() {
    let p = scenario("ex2").unwrap();
    let w = OmegaSchedule::Log.omega(1.0 / 64.0).unwrap();
    let coeffs = CoefficientSet::regularized(&p, Mollifier::standard(), w).unwrap();
    let h = 1e-3;
    let cfg = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
    for t in [0.3, 0.9, 1.4] {
        let ts: Vec<f64> = (-2..=2).map(|k| t + k as f64 * h).collect();
        let sol = solve_with(&p, &coeffs, &cfg, &[&[0.0][..], &ts].concat()).unwrap();
        let du = &sol.du[1..];
        let fd = du[0]
            .scale(Complex64::new(1.0, 0.0))
            .axpby(Complex64::new(1.0 / (12.0 * h), 0.0), &du[1], Complex64::new(-8.0 / (12.0 * h), 0.0))
            .unwrap()
            .axpby(Complex64::new(1.0, 0.0), &du[3], Complex64::new(8.0 / (12.0 * h), 0.0))
            .unwrap()
            .axpby(Complex64::new(1.0, 0.0), &du[4], Complex64::new(-1.0 / (12.0 * h), 0.0))
            .unwrap();
        let utt = equation_second_derivative(&p, &coeffs, t, &sol.u[3]).unwrap();
        let err = sobolev_norm(&utt.sub(&fd).unwrap(), -1.0);
        assert!(err <= 1e-6 * sobolev_norm(&utt, -1.0).max(1.0), "t={t}: {err}");
    }
}

#[test]
fn net_diagnostics_are_finite_and_nonnegative() {
    let p = scenario("inhomogeneous").unwrap();
    let grid = EpsilonGrid::powers_of_two(3, 8).unwrap();
    let net = run_net(&p, Mollifier::standard(), OmegaSchedule::Log, &grid, &IntegratorConfig::default(), &uniform_grid(p.horizon, 41)).unwrap();
    assert_eq!(net.diagnostics.failed(), 0);
    for e in &net.diagnostics.entries {
        assert!(e.sup_norms.unwrap().iter().all(|v| v.is_finite() && *v >= 0.0));
    }
    let rep = fit_moderateness(&net.diagnostics).unwrap();
    if rep.pass {
        assert!(rep.exponents.iter().all(|e| e.n_hat.is_finite()));
    }
    assert!(net.solutions.iter().all(Option::is_some));
    let zero = SpectralField::zeros(p.params, p.trunc.clone());
    assert_ne!(net.solutions[0].as_ref().unwrap().u[40], zero);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn epsilon_grids_are_strictly_decreasing(kmin in 1u32..20, span in 0u32..20) {
        let grid: EpsilonGrid = format!("{kmin}:{}", kmin + span).parse().unwrap();
        let v = grid.values();
        prop_assert_eq!(v.len() as u32, span + 1);
        prop_assert!(v.iter().all(|e| *e > 0.0 && *e < 1.0));
        prop_assert!(v.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn unsorted_grids_are_rejected(a in 0.01f64..0.99, b in 0.01f64..0.99) {
        prop_assume!(a <= b);
        prop_assert!(EpsilonGrid::new(vec![a, b]).is_err());
    }

    #[test]
    fn synthetic_power_laws_are_recovered(n in -1.0f64..4.0, c in 0.1f64..10.0) {
        let grid = EpsilonGrid::default();
        let sups: Vec<[f64; 3]> = grid.values().iter().map(|e| [c * e.powf(-n), c * e.powf(-n - 1.0), c * e.powf(-n - 2.0)]).collect();
        let rep = fit_moderateness(&NetDiagnostics::synthetic(0.0, grid.values(), &sups)).unwrap();
        for k in 0..3 {
            prop_assert!((rep.exponent(k).unwrap() - (n + k as f64)).abs() <= 1e-8);
        }
        prop_assert!(rep.pass);
    }
}
