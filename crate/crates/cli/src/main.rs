use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use cmc_scri_cli::commands;
use cmc_scri_cli::{configure_threads, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "cmc-scri", version, about = "CMC hypersurfaces near null infinity of Schwarzschild")]
struct Cli {
    /// JSON run configuration (defaults are used when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key=value` with a dot-path key, e.g. `solver.kappa=10`. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the foliation is spacelike and has the expected expansions.
    FoliationCheck,
    /// Select the barrier pair and estimate the obstruction coefficients.
    Barriers,
    /// Run the continuation solve and write solution, manifest and diagnostics.
    Solve,
    /// Re-fit the expansion from an existing run directory.
    Asymptotics {
        /// Directory holding `manifest.json` and `solution.csv`.
        run: PathBuf,
    },
    /// Merge the diagnostics of several runs.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    let start = Instant::now();
    match cli.command {
        Command::FoliationCheck => {
            let r = commands::foliation_check(&cfg)?;
            println!(
                "foliation spacelike on (0, {:.4e}]; {} expansion slopes ≥ {}",
                r.slab.s0,
                r.expansions.len(),
                cfg.foliation_check.min_slope
            );
        }
        Command::Barriers => {
            let r = commands::barriers(&cfg)?;
            println!(
                "β₁ = {}, β₂ = {}, s₀ = {:.4e}, margin {:.3e}",
                r.pair.beta1, r.pair.beta2, r.pair.s0, r.pair.margin
            );
            for e in &r.obstruction {
                println!("k = {}: {:.6} (expected {})", e.k, e.estimate, e.expected);
            }
        }
        Command::Solve => {
            let r = commands::solve(&cfg)?;
            let m = &r.manifest;
            for s in &m.stages {
                println!(
                    "stage {}: s_min = {:.4e}, {} Newton steps, residual {:.2e}",
                    s.stage,
                    s.s_min,
                    s.newton_iterations,
                    s.residuals.last().copied().unwrap_or(f64::NAN)
                );
            }
            match &r.diagnostics {
                Some(d) => {
                    let fit = &d.fit;
                    let mid = fit.c1.len() / 2;
                    println!("c1 ≈ {:.6} at θ = {:.4}", fit.c1[mid], fit.thetas[mid]);
                    for c in &d.claims {
                        println!(
                            "{} {} = {:.4e} (threshold {:.3e})",
                            if c.pass { "ok  " } else { "FAIL" },
                            c.claim_id,
                            c.value,
                            c.threshold
                        );
                    }
                }
                None => println!(
                    "diagnostics skipped: {}",
                    m.diagnostics_error.as_deref().unwrap_or("unknown")
                ),
            }
        }
        Command::Asymptotics { run } => {
            let r = commands::asymptotics(&run, &cfg.out)?;
            for c in &r.claims {
                println!("{} = {:.4e}", c.claim_id, c.value);
            }
        }
        Command::Report { runs } => {
            let r = commands::report(&runs, &cfg.out)?;
            println!("{} runs, all claims pass", r.runs.len());
        }
    }
    eprintln!("done in {:.2}s, artifacts in {}", start.elapsed().as_secs_f64(), cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
