use std::path::PathBuf;
use std::process::ExitCode;

use biot_stokes::precond::PreconditionerKind;
use biot_stokes::study::{self, ExperimentConfig, Table};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(version, about = "Biot-Stokes interface solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution convergence rates.
    Convergence(Common),
    /// Iteration counts of the diagonal and tangentially coupled preconditioners.
    Naive(Common),
    /// Condition numbers for boundary configurations and fractional variants.
    BcStudy(Common),
    /// Parameter-robustness sweep of the fractional preconditioner.
    Sweep(Common),
    /// Coupled versus diagonal pressure block.
    DiagCompare(Common),
    /// Closed interface: porous disk inside a fluid box.
    Enclosed(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file with study overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    maxit: Option<usize>,
    /// Comma-separated cells-per-unit resolutions, e.g. `4,8,16`.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Preconditioner(s), comma-separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    precond: Option<Vec<PreconditionerKind>>,
}

impl Common {
    fn config(&self) -> biot_stokes::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_toml_str(&std::fs::read_to_string(p)?)?,
            None => ExperimentConfig::default(),
        };
        cfg.seed = self.seed.or(cfg.seed);
        cfg.rtol = self.rtol.or(cfg.rtol);
        cfg.maxit = self.maxit.or(cfg.maxit);
        cfg.levels = self.levels.clone().or(cfg.levels);
        cfg.kinds = self.precond.clone().or(cfg.kinds);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> biot_stokes::Result<()> {
    let (common, runner): (&Common, fn(&ExperimentConfig) -> biot_stokes::Result<Table>) = match &cli.command {
        Command::Convergence(c) => (c, study::run_convergence),
        Command::Naive(c) => (c, study::run_naive),
        Command::BcStudy(c) => (c, study::run_bc_study),
        Command::Sweep(c) => (c, study::run_sweep),
        Command::DiagCompare(c) => (c, study::run_diag_compare),
        Command::Enclosed(c) => (c, study::run_enclosed),
    };
    let table = runner(&common.config()?)?;
    match &common.out {
        Some(p) => table.write(p)?,
        None => print!("{}", table.to_csv()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
