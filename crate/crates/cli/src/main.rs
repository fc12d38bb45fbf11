use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::TypedValueParser as _;
use clap::{Parser, Subcommand, ValueEnum};
use compass_cli::commands::{self, Written};
use compass_cli::{load_config, CliError};
use compass_core::experiments::{angle_grid, Figure, PresetOptions, ScanAxis, DEFAULT_ANGLES};

/// Radical-pair compass simulator.
#[derive(Parser)]
#[command(name = "compass", version, about)]
struct Cli {
    /// Maximum number of worker threads for sweeps.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    /// Accepted for scripting; every run is deterministic.
    #[arg(long, global = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Angular sweep of one scenario.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run a figure preset: fig2, fig3, fig4, s-dephasing-field, s-disc,
    /// s-gfactor, s-2nuclei, s-noise-field.
    Reproduce {
        figure: String,
        /// Output directory; files go to <out>/<figure>.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Number of angles over [0, π/2].
        #[arg(long, default_value_t = DEFAULT_ANGLES, value_parser = clap::value_parser!(u32).range(1..).map(|v| v as usize))]
        angles: usize,
    },
    /// Negativity against time for the configured noise rates.
    Negativity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Contrast and rf disruption over a grid of one rate.
    Scan {
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated rates, s⁻¹.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        /// Base scenario; defaults to the reference (with perpendicular rf
        /// for a k scan).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Parse and check a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    K,
    Noise,
    Dephasing,
}

impl From<AxisArg> for ScanAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::K => ScanAxis::K,
            AxisArg::Noise => ScanAxis::GammaNoise,
            AxisArg::Dephasing => ScanAxis::GammaZ,
        }
    }
}

fn report(w: Written) {
    print!("{}", w.summary);
    for f in &w.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep { config, out } => report(commands::sweep(&load_config(&config)?, &out)?),
        Command::Reproduce { figure, out, angles } => {
            let fig: Figure = figure.parse()?;
            let opts = PresetOptions {
                angle_grid: angle_grid(angles),
                ..PresetOptions::default()
            };
            report(commands::reproduce(fig, &out.join(fig.name()), &opts)?);
        }
        Command::Negativity { config, out } => report(commands::negativity(&load_config(&config)?, &out)?),
        Command::Scan {
            axis,
            grid,
            config,
            out,
        } => {
            let axis = ScanAxis::from(axis);
            let base = match config {
                Some(path) => load_config(&path)?.scenario,
                None => commands::default_scan_config(axis),
            };
            report(commands::scan(axis, &grid, &base, &out)?);
        }
        Command::Validate { config } => println!("{}", commands::validate(&load_config(&config)?)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
