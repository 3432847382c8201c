use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use gprj::commands::{
    cmd_compare, cmd_fit, cmd_simulate, cmd_study, cmd_summarize, CompareArgs, FitArgs,
    SimulateArgs, StudyArgs, SummarizeArgs,
};

#[derive(Parser)]
#[command(
    name = "gprj",
    version,
    about = "Bayesian proportional hazards with a gamma-process prior and adaptive time partitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a synthetic survival dataset from a scenario config
    Simulate {
        /// Scenario config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a model to a dataset and write samples plus summaries
    Fit {
        /// Fit config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Input dataset (CSV with time, event, covariate columns)
        #[arg(long)]
        data: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of chains
        #[arg(long)]
        chains: Option<usize>,
    },
    /// Run a replicate study: simulate, fit each model, tabulate
    Study {
        /// Study config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare fitted models on one dataset (DIC, LPML, PBF)
    Compare {
        /// The dataset all fits used
        #[arg(long)]
        data: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Two or more fit output directories
        #[arg(required = true, num_args = 2..)]
        fits: Vec<PathBuf>,
    },
    /// Regenerate summary tables from a fit's sample files
    Summarize {
        /// The dataset the fit used
        #[arg(long)]
        data: PathBuf,
        /// Fit output directory holding chain_*.samples and manifest.json
        #[arg(long)]
        fit: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Override the hazard grid resolution
        #[arg(long)]
        grid_points: Option<usize>,
        /// Override the credible level
        #[arg(long)]
        level: Option<f64>,
        /// Override the split histogram bin count
        #[arg(long)]
        bins: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors; everything else is usage.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Cmd::Simulate { config, out, seed } => cmd_simulate(&SimulateArgs { config, out, seed }),
        Cmd::Fit {
            config,
            data,
            out,
            seed,
            chains,
        } => cmd_fit(&FitArgs {
            config,
            data,
            out,
            seed,
            chains,
        }),
        Cmd::Study { config, out, seed } => cmd_study(&StudyArgs { config, out, seed }),
        Cmd::Compare { data, out, fits } => cmd_compare(&CompareArgs { data, out, fits }),
        Cmd::Summarize {
            data,
            fit,
            out,
            grid_points,
            level,
            bins,
        } => cmd_summarize(&SummarizeArgs {
            data,
            fit,
            out,
            grid_points,
            level,
            bins,
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
