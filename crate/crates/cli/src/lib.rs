//! Batch harness: reads an experiment config, runs one command, writes CSV or JSON.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, LoadedConfig};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "thermalize",
    version,
    about = "Deformed-shell counting and canonical typicality experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Experiment config (strict JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Level window `a:b` for Gibbs fits.
    #[arg(long)]
    pub fit_window: Option<String>,
    /// Output file; defaults to `output.path` or stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-level bath counts and P_n.
    Count(CommonArgs),
    /// Fitted inverse temperature for each kappa.
    Table1 {
        #[command(flatten)]
        common: CommonArgs,
        /// Also scan fit windows and report every admissible one, best match first.
        #[arg(long)]
        scan: bool,
    },
    /// Bath-energy bands per level with and without coupling.
    DeformMap(CommonArgs),
    /// Sampled reduced states against the counting prediction.
    Sample(CommonArgs),
    /// Exact and expanded two-level quasi-thermal quantities over an |F| grid.
    TwoLevel(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Count(c)
            | Command::DeformMap(c)
            | Command::Sample(c)
            | Command::TwoLevel(c) => c,
            Command::Table1 { common, .. } => common,
        }
    }
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: cannot read config: {e}", path.display())))?;
    LoadedConfig::parse(&text, &path.display().to_string())
}

/// Run one command end to end, writing its output.
pub fn run(cli: &Cli) -> Result<()> {
    let common = cli.command.common();
    let mut cfg = load_config(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.config.run.seed = seed;
    }
    if let Some(w) = &common.fit_window {
        w.parse::<thermalize::FitWindow>()
            .map_err(|e| CliError::Config(format!("--fit-window: {e}")))?;
        cfg.config.run.fit_window = Some(w.clone());
    }

    let mut deferred = None;
    let rendered = match &cli.command {
        Command::Count(_) => output::render_count(&commands::cmd_count(&cfg)?),
        Command::Table1 { scan, .. } => {
            let report = commands::cmd_table1(&cfg, *scan)?;
            if !report.monotone {
                deferred = Some(CliError::Physics(format!(
                    "fitted beta is not strictly decreasing in kappa: {:?}",
                    report.betas()
                )));
            }
            output::render_table1(&report)
        }
        Command::DeformMap(_) => output::render_deform(&commands::cmd_deform_map(&cfg)?),
        Command::Sample(_) => output::render_sample(&commands::cmd_sample(&cfg)?),
        Command::TwoLevel(_) => output::render_two_level(&commands::cmd_two_level(&cfg)?),
    };

    let path = common
        .out
        .clone()
        .or_else(|| cfg.config.output.path.clone().map(PathBuf::from));
    let format = cfg.config.output.format;
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(&p)?);
            output::write(&rendered, &cfg, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            output::write(&rendered, &cfg, format, stdout.lock())?;
        }
    }
    deferred.map_or(Ok(()), Err)
}

/// Size rayon's global pool from `THERMALIZE_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("THERMALIZE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}
