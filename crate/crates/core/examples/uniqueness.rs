//! Nets built from two different mollifiers draw together as ε shrinks.
//!
//! ```bash
//! cargo run -p landau-vws --example uniqueness
//! ```

use landau_vws::cauchy_engine::default_output_grid;
use landau_vws::coefficients::{Mollifier, OmegaSchedule};
use landau_vws::mode_solver::IntegratorConfig;
use landau_vws::vws_harness::{check_uniqueness_stability, scenario, EpsilonGrid};

fn main() -> landau_vws::error::Result<()> {
    for name in ["regular", "ex2"] {
        let p = scenario(name)?;
        let rep = check_uniqueness_stability(
            &p,
            Mollifier::standard(),
            Mollifier::shifted(0.5)?,
            OmegaSchedule::Log,
            &EpsilonGrid::default(),
            &IntegratorConfig::default(),
            &default_output_grid(p.horizon),
        )?;
        println!("{name}:");
        for e in &rep.entries {
            println!("  eps={:9.3e} difference={:.4e}", e.eps, e.value);
        }
        println!("  decreasing: {} (partial check; faster-than-power decay is not certified)", rep.decreasing);
    }
    Ok(())
}
