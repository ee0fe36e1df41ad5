use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landau_vws::coefficients::OmegaSchedule;
use landau_vws::vws_harness::commands::{self, RunOptions};
use landau_vws::vws_harness::{EpsilonGrid, Reports};

#[derive(Parser)]
#[command(name = "landau-vws", version, about = "Landau wave equation: classical solves and very weak solution nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON problem description (overrides the command's default preset)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// ε = 2^-k for k in k_min..=k_max
    #[arg(long, global = true, default_value = "2:12")]
    eps_grid: EpsilonGrid,
    /// log | power:<p> | constant:<c>
    #[arg(long, global = true, default_value = "log")]
    schedule: OmegaSchedule,
    /// Relative integrator tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// <j_max>:<n_max>
    #[arg(long, global = true, value_parser = parse_truncation)]
    truncation: Option<(u32, u32)>,
    /// Seed for random band-limited data when the problem has none
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Classical solve with the energy estimate check
    Solve,
    /// Regularised net and moderateness fit
    Net,
    /// Regularised nets against the classical solution
    Consistency,
    /// Nets from two different mollifiers
    Uniqueness,
    /// Preset scenario: ex1, ex2, regular, inhomogeneous
    Scenario { name: String },
}

fn parse_truncation(s: &str) -> Result<(u32, u32), String> {
    let (j, n) = s.split_once(':').ok_or("expected <j_max>:<n_max>")?;
    Ok((j.trim().parse().map_err(|e| format!("j_max: {e}"))?, n.trim().parse().map_err(|e| format!("n_max: {e}"))?))
}

fn print_summary(r: &Reports) {
    if let Some(c) = &r.classical {
        println!(
            "estimate: {} (measured {:.6e}, bound {:.6e})",
            if c.estimate.passed { "pass" } else { "fail" },
            c.estimate.measured_c,
            c.estimate.theoretical_c
        );
    }
    if let Some(d) = &r.net {
        println!("net: {} of {} solves finished", d.entries.len() - d.failed(), d.entries.len());
    }
    if let Some(m) = &r.moderateness {
        for e in &m.exponents {
            println!("moderateness k={}: N = {:.4} (stable: {})", e.k, e.n_hat, e.stable);
        }
        println!("moderateness: {}", if m.pass { "pass" } else { "fail" });
    }
    if let Some(c) = &r.consistency {
        println!("consistency: ratio {:.4e}, inversions {}, consistent {}", c.ratio, c.inversions, c.consistent);
    }
    if let Some(u) = &r.uniqueness {
        println!("uniqueness: inversions {}, decreasing {}", u.inversions, u.decreasing);
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let opts = RunOptions {
        config: cli.config,
        out: cli.out,
        eps_grid: cli.eps_grid,
        schedule: cli.schedule,
        tol: cli.tol,
        truncation: cli.truncation,
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Solve => commands::run_solve(&opts),
        Command::Net => commands::run_net_command(&opts),
        Command::Consistency => commands::run_consistency(&opts),
        Command::Uniqueness => commands::run_uniqueness(&opts),
        Command::Scenario { name } => commands::run_scenario(name, &opts),
    };
    match result {
        Ok(r) => {
            print_summary(&r);
            println!("reports written to {}", opts.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
