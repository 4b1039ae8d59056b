//! `sim`: run relay-channel experiments from TOML configs or built-in presets.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use marc_core::experiments::{self, ExperimentConfig};
use marc_core::Error;

#[derive(Parser)]
#[command(
    name = "sim",
    version,
    about = "Rates and outage of quantize-forward relaying"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a built-in preset (fig3 ... fig8).
    Preset {
        #[arg(value_parser = experiments::PRESET_NAMES)]
        name: String,
        /// Master seed of the fading draws.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo samples per point.
        #[arg(long)]
        samples: Option<u64>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Check a config file without running it.
    Validate {
        config: PathBuf,
        /// `key=value` override (dotted keys, TOML values); repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

#[derive(Args)]
struct RunOpts {
    /// CSV output path (default: the config's `output.csv`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a JSON mirror of the CSV here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// `key=value` override (dotted keys, TOML values); repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn execute(cfg: &ExperimentConfig, opts: &RunOpts) -> Result<(), Error> {
    let result = experiments::run(cfg)?;
    let from_cfg = |f: fn(&experiments::OutputSpec) -> Option<&String>| {
        cfg.output.as_ref().and_then(f).map(PathBuf::from)
    };
    let csv_path = opts.out.clone().or_else(|| from_cfg(|o| o.csv.as_ref()));
    let json_path = opts.json.clone().or_else(|| from_cfg(|o| o.json.as_ref()));
    match csv_path {
        Some(p) => {
            result.write_csv(&p)?;
            eprintln!("wrote {}", p.display());
        }
        None => match std::io::stdout().write_all(&result.to_csv()?) {
            // the reader went away (e.g. `sim ... | head`): nothing left to do
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
            other => other?,
        },
    }
    if let Some(p) = json_path {
        result.write_json(&p)?;
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, Error> {
    ExperimentConfig::load(path, overrides)
}

fn main_inner(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, opts } => execute(&load(&config, &opts.overrides)?, &opts),
        Command::Preset {
            name,
            seed,
            samples,
            opts,
        } => {
            let mut overrides = Vec::new();
            if let Some(s) = seed {
                overrides.push(format!("seed={s}"));
            }
            if let Some(n) = samples {
                overrides.push(format!("samples={n}"));
            }
            overrides.extend(opts.overrides.iter().cloned());
            execute(&experiments::load_preset(&name, &overrides)?, &opts)
        }
        Command::Validate { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let grid = cfg.grid()?;
            let schemes: Vec<_> = cfg.schemes.iter().map(|s| s.name()).collect();
            println!(
                "ok: {} ({}, {} points of {}, schemes {})",
                cfg.name,
                cfg.kind,
                grid.len(),
                cfg.kind.variable(),
                schemes.join(",")
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::UnknownLabel(_) | Error::Argument(_) => 2,
                Error::Io(_) => 3,
                Error::Degenerate { .. } | Error::Infeasible { .. } | Error::Invariant(_) => 4,
            })
        }
    }
}
