//! `selfsim`: ground states, interior bases, matched self-similar profiles,
//! σ-sweeps and the invariant checks, with reproducible CSV/JSON output.

mod commands;
mod config;
mod error;
mod output;
mod verify;

use clap::{CommandFactory, Parser, Subcommand};
use config::{Overrides, RunConfig};
use error::{CliError, CliResult};
use output::Outputs;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "selfsim", version, about = "Self-similar blow-up profiles for supercritical NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state Q with κ and N_c.
    GroundState(Overrides),
    /// Interior basis (A, D, B) on [0, b^{-1/2}].
    Basis(Overrides),
    /// One matched solve, its profile and diagnostics.
    Solve(Overrides),
    /// Continuation along a descending σ list; writes the law table.
    Sweep(Overrides),
    /// Run the invariant suites; exit 3 if any fails.
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[command(flatten)]
    flags: Overrides,
    /// Test hook: scale κ_B by (1 + x) before the identity check.
    #[arg(long, hide = true, default_value_t = 0.0)]
    perturb_kappa_b: f64,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GroundState(_) => "ground-state",
            Command::Basis(_) => "basis",
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Verify(_) => "verify",
        }
    }
}

fn verify(args: &VerifyArgs) -> CliResult<Vec<std::path::PathBuf>> {
    let cfg = RunConfig::resolve(&args.flags)?;
    let reports = verify::run_suites(verify::Faults { kappa_b: args.perturb_kappa_b });
    for r in &reports {
        eprintln!(
            "{:<24} {}  max residual {:.3e} (tolerance {:.0e})",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.max_residual,
            r.tolerance
        );
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.name.to_string()).collect();
    let mut out = Outputs::new(&cfg, "verify");
    out.json("verify.json", &serde_json::json!({ "passed": failed.is_empty(), "suites": reports }))?;
    let written = out.commit()?;
    if failed.is_empty() {
        Ok(written)
    } else {
        Err(CliError::Verify(failed))
    }
}

fn run(cmd: &Command) -> CliResult<Vec<std::path::PathBuf>> {
    match cmd {
        Command::GroundState(o) => commands::ground_state(&RunConfig::resolve(o)?),
        Command::Basis(o) => commands::basis(&RunConfig::resolve(o)?),
        Command::Solve(o) => commands::solve(&RunConfig::resolve(o)?),
        Command::Sweep(o) => commands::sweep(&RunConfig::resolve(o)?),
        Command::Verify(args) => verify(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.command) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Config(_) = e {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(cli.command.name()) {
                    eprintln!("\n{}", sub.render_usage());
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
