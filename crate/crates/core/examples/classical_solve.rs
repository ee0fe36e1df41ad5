//! Classical solve of the regular scenario with the energy estimate check.
//!
//! ```bash
//! cargo run -p landau-vws --example classical_solve
//! ```

use landau_vws::cauchy_engine::{default_output_grid, estimate_check, solution_norms, solve_classical, top_shell_fraction};
use landau_vws::mode_solver::IntegratorConfig;
use landau_vws::spectral_basis::{Component, SpectralIndex};
use landau_vws::vws_harness::{commands::fill_random_data, scenario};

fn main() -> landau_vws::error::Result<()> {
    let mut p = scenario("regular")?;
    p.u0.set(SpectralIndex::new(0, 0), Component::One, 0.0.into())?;
    fill_random_data(&mut p, 42)?;

    let sol = solve_classical(&p, &IntegratorConfig::default(), &default_output_grid(p.horizon))?;
    for n in solution_norms(&sol, p.sobolev_order).iter().step_by(40) {
        println!("t={:4.2}  ||u||_H^1 = {:.6}  ||u_t||_L2 = {:.6}", n.t, n.h_norm_1plus_s, n.h_norm_s);
    }
    let check = estimate_check(&sol, &p)?;
    println!("estimate passed: {} (measured C {:.4}, bound {:.4})", check.passed, check.measured_c, check.theoretical_c);
    println!("top-shell energy fraction {:.3e}", top_shell_fraction(&sol, p.sobolev_order));

    let mut csv = Vec::new();
    landau_vws::cauchy_engine::write_solution_csv(&sol, &mut csv).expect("in-memory write");
    println!("solution.csv would have {} lines", csv.split(|&b| b == b'\n').count() - 1);
    Ok(())
}
