//! The `bwk` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::{config_error, Result};
use crate::experiment::{aggregate, run_experiment, trace_oracle, AggregateRow, RunOptions};
use crate::output::{
    ensure_dir, format_table, read_csv, write_csv, write_text, AGGREGATES_FILE, CONFIG_FILE,
    ESTIMATION_ERROR_FILE, RESULTS_FILE,
};
use crate::presets;

#[derive(Debug, Parser)]
#[command(
    name = "bwk",
    version,
    about = "Bandits-with-knapsacks experiments with demand predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write results.csv and aggregates.csv.
    Run(RunArgs),
    /// Run an experiment over replaced grid axes (b=…, T=…, or oracle offsets x=…).
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Axis as NAME=V1,V2,...; may be repeated.
        #[arg(long = "axis", required = true, value_name = "NAME=VALUES")]
        axes: Vec<String>,
    },
    /// Record the forecast error of each configured oracle in estimation_error.csv.
    TraceOracle(RunArgs),
    /// Pretty-print an aggregates.csv (or the one inside a directory).
    Table {
        /// aggregates.csv or a directory containing it.
        path: PathBuf,
    },
    /// List the shipped presets.
    Presets,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Name of a shipped preset.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory (default: the configuration's out_dir, else out/<name>).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Replication count override.
    #[arg(long, value_name = "N")]
    reps: Option<usize>,
    /// Worker threads.
    #[arg(long, value_name = "N", env = "BWK_ADVICE_THREADS")]
    threads: Option<usize>,
    /// Record per-run wall-clock time (makes outputs non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => {
                ExperimentConfig::from_json(&format!(r#"{{"schema": 1, "preset": "{name}"}}"#))?
            }
            (None, None) => return Err(config_error("one of --config or --preset is required")),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(reps) = self.reps {
            config.replications = reps;
        }
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self, config: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| Path::new("out").join(&config.name))
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            threads: self.threads,
            timing: self.timing,
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run(args) => {
            let config = args.resolve()?;
            run_and_write(&config, &args, stdout)
        }
        Command::Sweep { run, axes } => {
            let mut config = run.resolve()?;
            for axis in &axes {
                config.apply_axis(axis)?;
            }
            run_and_write(&config, &run, stdout)
        }
        Command::TraceOracle(args) => {
            let config = args.resolve()?;
            let rows = trace_oracle(&config, &args.options())?;
            let dir = args.out_dir(&config);
            ensure_dir(&dir)?;
            write_text(&dir, CONFIG_FILE, &config.to_json())?;
            let path = dir.join(ESTIMATION_ERROR_FILE);
            write_csv(&path, &rows)?;
            let _ = writeln!(stdout, "wrote {}", path.display());
            Ok(())
        }
        Command::Table { path } => {
            let file = if path.is_dir() {
                path.join(AGGREGATES_FILE)
            } else {
                path
            };
            let rows: Vec<AggregateRow> = read_csv(&file)?;
            let _ = write!(stdout, "{}", format_table(&rows));
            Ok(())
        }
        Command::Presets => {
            let width = presets::catalog()
                .iter()
                .map(|(n, _)| n.len())
                .max()
                .unwrap_or(0);
            for (name, description) in presets::catalog() {
                let _ = writeln!(stdout, "{name:width$}  {description}");
            }
            Ok(())
        }
    }
}

fn run_and_write(config: &ExperimentConfig, args: &RunArgs, stdout: &mut dyn Write) -> Result<()> {
    let rows = run_experiment(config, &args.options())?;
    let aggregates = aggregate(&rows);
    let dir = args.out_dir(config);
    ensure_dir(&dir)?;
    write_text(&dir, CONFIG_FILE, &config.to_json())?;
    write_csv(&dir.join(RESULTS_FILE), &rows)?;
    write_csv(&dir.join(AGGREGATES_FILE), &aggregates)?;
    let _ = write!(stdout, "{}", format_table(&aggregates));
    let _ = writeln!(stdout, "wrote {}", dir.display());
    Ok(())
}
