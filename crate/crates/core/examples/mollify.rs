//! Regularising distributional coefficients with a Friedrichs mollifier.
//!
//! ```bash
//! cargo run -p landau-vws --example mollify
//! ```

use landau_vws::coefficients::{
    moderateness_bound_estimate, regularize, sup_sample_times, verify_lower_bound, Mollifier, OmegaSchedule,
    TimeDistribution,
};

fn main() -> landau_vws::error::Result<()> {
    let psi = Mollifier::standard();
    println!("psi(0) = {:.6}, support {:?}", psi.eval(0.0), psi.support());

    let horizon = 2.0;
    let a = TimeDistribution::constant(horizon, 1.0)?
        .plus(&TimeDistribution::delta(horizon, 1.0, 1.0)?)?
        .with_lower_bound(1.0)?;
    let step = TimeDistribution::step(horizon, 1.0, 1.0, 2.0)?;

    for eps in [0.25, 1.0 / 64.0, 1.0 / 4096.0] {
        let w = OmegaSchedule::Log.omega(eps)?;
        let ra = regularize(&a, psi, w)?;
        let rs = regularize(&step, psi, w)?;
        println!(
            "eps={eps:.3e} omega={w:.4}: (1+delta)_eps(1) = {:.4}, h_eps(1) = {:.4}, h_eps'(1) = {:.4}",
            ra.value(1.0),
            rs.value(1.0),
            rs.derivative(1.0)
        );
        println!("  a_eps >= 1 on the sample grid: {}", verify_lower_bound(&ra, 1.0, &sup_sample_times(&a, &psi, w)));
    }

    let grid: Vec<f64> = (2..=10).map(|k| 2f64.powi(-k)).collect();
    for g in moderateness_bound_estimate(&a, psi, OmegaSchedule::Power(1.0), &grid, 1)? {
        println!("sup |d^{} a_eps| ~ omega^-{:.3} (residual {:.1e})", g.k, g.exponent, g.rms_residual);
    }
    Ok(())
}
