use std::path::PathBuf;
use std::process::ExitCode;

use bicrit_cli::{cmd_certify, cmd_run, cmd_sweep, Overrides};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bicrit", version, about = "Explore-then-exploit bandit simulator for bi-criteria submodular problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print and save the resilience certificate of the configured algorithm.
    Certify(Common),
    /// One online run at a single horizon and seed.
    Run(Common),
    /// Every (horizon, seed) cell, with per-horizon statistics.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Horizon (run: which horizon; sweep: restrict to this one).
    #[arg(long = "t")]
    horizon: Option<u64>,
    #[arg(long, env = "BICRIT_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    m_override: Option<u64>,
    /// Output directory, overriding the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            horizon: self.horizon,
            seed: self.seed,
            workers: self.workers,
            m_override: self.m_override,
            out: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Certify(c) => cmd_certify(&c.config, &c.overrides()).map(|r| {
            for w in &r.certification.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", serde_json::to_string_pretty(&r).expect("serializable"));
            true
        }),
        Command::Run(c) => cmd_run(&c.config, &c.overrides()).map(|(path, s)| {
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "T = {}, seed = {}, m = {}, queries = {}, committed = {}",
                s.horizon, s.seed, s.m, s.n_queries, s.committed
            );
            println!(
                "regret_f = {}, ccv_g = {}, bound (C = {}) = {}",
                s.regret_f, s.ccv_g, s.bound_constant, s.theoretical_bound
            );
            println!("wrote {}", path.display());
            true
        }),
        Command::Sweep(c) => cmd_sweep(&c.config, &c.overrides()).map(|s| {
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            for h in &s.per_horizon {
                println!(
                    "T = {:>8}  regret = {:.4e} ± {:.2e}  ccv = {:.4e} ± {:.2e}  ratio = {:.3}",
                    h.horizon, h.mean_regret_f, h.se_regret_f, h.mean_ccv_g, h.se_ccv_g, h.regret_bound_ratio
                );
            }
            let show = |e: &bicrit_cli::commands::Exponent| e.slope.map_or("n/a".to_string(), |s| format!("{s:.3}"));
            println!("exponents: regret {}, ccv {}", show(&s.regret_exponent), show(&s.ccv_exponent));
            for f in &s.failures {
                eprintln!("failed: T = {}, seed = {}: {}", f.horizon, f.seed, f.reason);
            }
            s.succeeded()
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
