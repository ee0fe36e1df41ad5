//! Runs every preset scenario and writes the reports under `target/scenarios/`.
//!
//! ```bash
//! cargo run -p landau-vws --example preset_scenarios
//! ```

use std::path::PathBuf;

use landau_vws::vws_harness::commands::{run_scenario, RunOptions};
use landau_vws::vws_harness::SCENARIOS;

fn main() -> landau_vws::error::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/scenarios");
    for name in SCENARIOS {
        let opts = RunOptions { out: root.join(name), ..Default::default() };
        let r = run_scenario(name, &opts)?;
        let m = r.moderateness.expect("scenario fits moderateness");
        let exps: Vec<String> = m.exponents.iter().map(|e| format!("{:+.3}", e.n_hat)).collect();
        println!("{name:14} N = [{}] moderate {} -> {}", exps.join(", "), m.pass, opts.out.display());
    }
    Ok(())
}
