//! One spectral mode: DOP853 against the closed form, energy and Gronwall bound.
//!
//! ```bash
//! cargo run -p landau-vws --example mode_oscillator
//! ```

use std::sync::Arc;

use landau_vws::cauchy_engine::uniform_grid;
use landau_vws::coefficients::FnCoefficient;
use landau_vws::mode_solver::{
    closed_form_constant, gronwall_bound_check, integrate_mode, mode_estimate_check, IntegratorConfig, ModeODE, Variant,
};
use num_complex::Complex64;

fn main() -> landau_vws::error::Result<()> {
    let (a0, q0, nu2) = (2.0, 1.5, 5.0);
    let (v0, v1) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, -0.5));
    let ts = uniform_grid(10.0, 11);
    let cfg = IntegratorConfig::default();

    let ode = ModeODE::new(nu2, Arc::new(FnCoefficient::constant(a0)), Arc::new(FnCoefficient::constant(q0)), Variant::CPa, None)?;
    let sol = integrate_mode(&ode, v0, v1, &ts, &cfg)?;
    for st in &sol.states {
        let (exact, _) = closed_form_constant(a0, q0, nu2, Variant::CPa, v0, v1, st.t, None)?;
        println!("t={:5.2}  v = {:+.10}  |v - exact| = {:.2e}", st.t, st.v_hat(ode.nu()), (st.v_hat(ode.nu()) - exact).norm());
    }
    println!("energy drift {:.2e}, {} steps", sol.trace.max_relative_drift(), sol.stats.accepted);

    let ode = ModeODE::new(
        nu2,
        Arc::new(FnCoefficient::new(|t: f64| 2.0 + (3.0 * t).sin(), |t: f64| 3.0 * (3.0 * t).cos())),
        Arc::new(FnCoefficient::constant(q0)),
        Variant::CPb,
        None,
    )?;
    let sol = integrate_mode(&ode, v0, v1, &ts, &cfg)?;
    let g = gronwall_bound_check(&sol.trace, &ode)?;
    let est = mode_estimate_check(&ode, v0, v1, &sol.states);
    println!("variable a: Gronwall holds {} (worst ratio {:.3})", g.holds, g.worst_ratio);
    println!("estimate: passed {}, measured {:.4} vs constant {:.4}", est.passed, est.measured_ratio, est.constant);
    Ok(())
}
