use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use orderbound_cli::commands::{self, DEFAULT_PEAK};
use orderbound_cli::config::ExperimentConfig;
use orderbound_cli::{exit, exit_code};

/// Interval-bound feasible sets and TV deblurring experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify sampled points of the two-variable problem against U and U**.
    SampleSet {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tighten operator bounds under a known product `Av = g`.
    Tighten {
        /// MatrixMarket file with A^l.
        #[arg(long)]
        lower: PathBuf,
        /// MatrixMarket file with A^u.
        #[arg(long)]
        upper: PathBuf,
        /// Single-column CSV with v.
        #[arg(long)]
        v: PathBuf,
        /// Single-column CSV with g.
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print PSNR and SSIM of an image (PGM or CSV) against a reference.
    Metrics {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PEAK)]
        peak: f64,
    },
}

fn load(config: &PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if out.is_some() {
        cfg.output_dir = out;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let outcome = commands::run(load(&config, seed, out)?)?;
            println!("{}", outcome.report.display());
            if let Some(e) = outcome.failure {
                return Err(e.context("experiment finished with failed variants"));
            }
        }
        Command::SampleSet { config, seed, out } => {
            let cfg = load(&config, seed, out)?.resolve()?;
            let dir = cfg.output_dir.clone().unwrap_or_default();
            std::fs::create_dir_all(&dir)?;
            println!("{}", commands::sample_set(cfg, &dir)?.display());
        }
        Command::Tighten { lower, upper, v, g, out } => {
            println!("{}", commands::tighten_files(&lower, &upper, &v, &g, &out, None)?.display());
        }
        Command::Metrics { image, reference, peak } => {
            println!("{}", serde_json::to_string_pretty(&commands::metrics(&image, &reference, peak)?)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share the generic error code; 2 is reserved for infeasibility
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::ERROR as u8 } else { exit::SUCCESS as u8 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
