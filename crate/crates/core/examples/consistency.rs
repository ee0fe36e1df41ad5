//! Regularised nets converge to the classical solution for smooth coefficients.
//!
//! ```bash
//! cargo run -p landau-vws --example consistency
//! ```

use landau_vws::cauchy_engine::default_output_grid;
use landau_vws::coefficients::{Mollifier, OmegaSchedule};
use landau_vws::mode_solver::IntegratorConfig;
use landau_vws::vws_harness::{check_consistency, scenario, EpsilonGrid};

fn main() -> landau_vws::error::Result<()> {
    let p = scenario("regular")?;
    let grid = EpsilonGrid::powers_of_two(2, 10)?;
    for schedule in [OmegaSchedule::Power(1.0), OmegaSchedule::Log] {
        let rep = check_consistency(&p, Mollifier::standard(), schedule, &grid, &IntegratorConfig::default(), &default_output_grid(p.horizon))?;
        println!("schedule {schedule}:");
        for e in &rep.entries {
            println!("  eps={:9.3e} omega={:.4} error={:.3e}", e.eps, e.omega, e.value);
        }
        println!("  ratio {:.3e}, inversions {}, consistent {}", rep.ratio, rep.inversions, rep.consistent);
    }
    Ok(())
}
