mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use octobundle::{FlowConfig, Grid, VerifyConfig};

use config::{non_negative, out_dir, positive, RunConfig};

#[derive(Parser)]
#[command(name = "octobundle", version, about = "Octonion bundle G2-structure toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON file with defaults for any of the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and field dumps.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the lattice kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the algebraic identity suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Tolerance for sampled identities [default: 1e-10].
        #[arg(long)]
        tol: Option<f64>,
        /// Tolerance for exact tables and the Clifford relation [default: 1e-12].
        #[arg(long)]
        tight_tol: Option<f64>,
        /// Self-test: run against a 3-form with one sign flipped.
        #[arg(long)]
        corrupt_phi: bool,
    },
    /// Torsion of a gauge field computed two ways, with its decomposition.
    Torsion {
        #[command(flatten)]
        common: Common,
        /// Field spec JSON.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// One-based active axes, e.g. 1,4.
        #[arg(long, value_delimiter = ',')]
        axes: Option<Vec<usize>>,
        /// Repeat at 2n and print the discrepancy ratio.
        #[arg(long)]
        refine: bool,
        /// Dump the gauge field and torsion in binary form (needs --out).
        #[arg(long)]
        write_fields: bool,
    },
    /// Split a tensor, a 3-form or a torsion field into irreducible parts.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// JSON with "tensor" or "three_form", or a torsion .bin dump.
        #[arg(long)]
        input: PathBuf,
    },
    /// Gradient flow of the torsion energy from V = 1.
    Flow {
        #[command(flatten)]
        common: Common,
        /// Field spec of the gauge field defining the reference structure.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        axes: Option<Vec<usize>>,
        /// Initial and maximal time step [default: 0.05].
        #[arg(long)]
        dt0: Option<f64>,
        /// [default: 2000]
        #[arg(long)]
        max_steps: Option<usize>,
        /// Target for the sup norm of Div T [default: 1e-6].
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn init_logging() {
    let level = match std::env::var("OCTOBUNDLE_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Info,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

fn setup(common: &Common) -> Result<(RunConfig, Option<PathBuf>)> {
    let cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(threads) = common.threads.or(cfg.threads) {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring threads")?;
    }
    let out = out_dir(common.out.clone().or(cfg.out.clone()))?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Verify { common, seed, trials, tol, tight_tol, corrupt_phi } => {
            let (cfg, out) = setup(&common)?;
            let defaults = VerifyConfig::default();
            let trials = trials.or(cfg.trials).unwrap_or(defaults.trials);
            if trials == 0 {
                anyhow::bail!("trials must be at least 1");
            }
            let vc = VerifyConfig {
                seed: seed.or(cfg.seed).unwrap_or(defaults.seed),
                trials,
                tol: positive("tol", tol.or(cfg.tol).unwrap_or(defaults.tol))?,
                tight_tol: positive("tight-tol", tight_tol.or(cfg.tight_tol).unwrap_or(defaults.tight_tol))?,
                corrupt_phi,
            };
            commands::verify(&vc, &out)
        }
        Command::Torsion { common, field, n, axes, refine, write_fields } => {
            let (cfg, out) = setup(&common)?;
            let path = field.or(cfg.field).context("torsion needs --field")?;
            let spec = commands::load_spec(&path, n.or(cfg.n), axes.or(cfg.axes))?;
            commands::torsion(&spec, refine, write_fields, &out)
        }
        Command::Decompose { common, input } => {
            let (_, out) = setup(&common)?;
            commands::decompose(&input, &out)
        }
        Command::Flow { common, field, n, axes, dt0, max_steps, tol } => {
            let (cfg, out) = setup(&common)?;
            let (n, axes) = (n.or(cfg.n), axes.or(cfg.axes));
            let spec = match field.or(cfg.field) {
                Some(path) => Some(commands::load_spec(&path, n, axes.clone())?),
                None => None,
            };
            let grid = match (&spec, n, axes) {
                (None, Some(n), Some(axes)) => Some(Grid::from_one_based(n, &axes)?),
                _ => None,
            };
            let fc = FlowConfig {
                dt0: positive("dt0", dt0.or(cfg.dt0).unwrap_or(0.05))?,
                max_steps: max_steps.or(cfg.max_steps).unwrap_or(2000),
                tol: non_negative("tol", tol.or(cfg.tol).unwrap_or(1e-6))?,
            };
            commands::flow(spec.as_ref(), grid, &fc, &out)
        }
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(commands::EXIT_CONFIG as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::EXIT_CONFIG as u8)
        }
    }
}
