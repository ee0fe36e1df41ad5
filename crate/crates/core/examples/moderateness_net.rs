//! Very weak solution net for a ≡ 1, q = δ₁ and its moderateness exponents.
//!
//! ```bash
//! cargo run -p landau-vws --example moderateness_net
//! ```

use landau_vws::cauchy_engine::default_output_grid;
use landau_vws::coefficients::{Mollifier, OmegaSchedule, TimeDistribution};
use landau_vws::mode_solver::IntegratorConfig;
use landau_vws::vws_harness::{fit_moderateness, run_net, scenario, EpsilonGrid};

fn main() -> landau_vws::error::Result<()> {
    let mut p = scenario("ex1")?;
    p.a = TimeDistribution::constant(p.horizon, 1.0)?.with_lower_bound(1.0)?;

    let grid = EpsilonGrid::default();
    let net = run_net(&p, Mollifier::standard(), OmegaSchedule::Log, &grid, &IntegratorConfig::default(), &default_output_grid(p.horizon))?;
    println!("{:>10} {:>8} {:>12} {:>12} {:>12}", "eps", "omega", "sup u", "sup u_t", "sup u_tt");
    for e in &net.diagnostics.entries {
        if let Some([u, du, ddu]) = e.sup_norms {
            println!("{:10.3e} {:8.4} {u:12.6} {du:12.6} {ddu:12.6}", e.eps, e.omega);
        }
    }
    let rep = fit_moderateness(&net.diagnostics)?;
    for e in &rep.exponents {
        println!("k={}: N = {:+.4} (halves {:+.4} / {:+.4})", e.k, e.n_hat, e.first_half_slope, e.second_half_slope);
    }
    println!("moderate: {}", rep.pass);
    Ok(())
}
