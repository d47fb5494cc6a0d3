use clap::{Parser, Subcommand};
use qdc_cli::{execute, load_config, CliError, Command, Overrides, EXIT_IO};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qdc",
    version,
    about = "Delayed-choice interferometer simulations"
)]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Single protocol run: run.json and run_trace.csv
    Run(Common),
    /// Phase sweep: fringe.csv
    Fringe(Common),
    /// Angle and phase sweep: morph.csv and morph_visibility.csv
    Morph(Common),
    /// Selective-drive traces: rabi.csv
    Rabi(Common),
}

#[derive(clap::Args)]
struct Common {
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the integration step
    #[arg(long)]
    dt: Option<f64>,
    /// Override the Fock truncation
    #[arg(long)]
    nmax: Option<usize>,
    /// Worker threads for sweeps
    #[arg(long)]
    jobs: Option<usize>,
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", err.diagnostic());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (command, common) = match args.command {
        Sub::Run(c) => (Command::Run, c),
        Sub::Fringe(c) => (Command::Fringe, c),
        Sub::Morph(c) => (Command::Morph, c),
        Sub::Rabi(c) => (Command::Rabi, c),
    };
    let overrides = Overrides {
        dt: common.dt,
        n_max: common.nmax,
    };
    let cfg = match load_config(&common.config, overrides) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e.into()),
    };
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return ExitCode::from(EXIT_IO as u8);
        }
    };
    match pool.install(|| execute(command, &cfg, &common.out)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
