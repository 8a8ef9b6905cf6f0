//! `homsim`: figure tables and parameter sweeps for heralded superposition
//! operations in truncated Fock space.

mod config;
mod error;
mod output;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{Config, ExperimentId, Format, Overrides};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "homsim",
    version,
    about = "Heralded second-order superposition operations in truncated Fock space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output file; `-` writes the table to stdout and the manifest to stderr.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Per-mode Fock cutoff, overriding the config.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Worker threads for grid points (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the shipped config of an experiment.
    Figure {
        #[arg(value_enum)]
        id: ExperimentId,
    },
    /// Run a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// NOON state from the cascade of second-order operations.
    Noon {
        #[arg(long)]
        n: i64,
        /// Use the squeezer circuits instead of the ideal operators.
        #[arg(long)]
        physical: bool,
        #[arg(long, requires = "physical", default_value_t = 0.05)]
        s: f64,
        /// On-off herald efficiency; exact single-photon heralds if omitted.
        #[arg(long, requires = "physical")]
        eta: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<u8> {
    let overrides = Overrides {
        out: cli.out,
        format: cli.format,
        cutoff: cli.cutoff,
        workers: cli.workers,
    };
    let mut cfg = match cli.command {
        Command::Figure { id } => Config::from_shipped(id)?,
        Command::Sweep { config } => Config::from_path(&config)?,
        Command::Validate { config } => {
            let mut cfg = Config::from_path(&config)?;
            cfg.apply(&overrides)?;
            println!(
                "ok: {} ({}, {} grid points, cutoff {})",
                cfg.origin,
                cfg.experiment.name(),
                cfg.grid.points(),
                cfg.cutoff
            );
            return Ok(0);
        }
        Command::Noon {
            n,
            physical,
            s,
            eta,
        } => Config::parse(&noon_config(n, physical, s, eta), "command line")?,
    };
    cfg.apply(&overrides)?;
    execute(&cfg)
}

fn noon_config(n: i64, physical: bool, s: f64, eta: Option<f64>) -> String {
    // squeezers also populate N + 2 before the herald removes it
    let cutoff = if physical { n + 2 } else { n };
    let mut text = format!(
        "experiment = \"noon\"\ncutoff = {}\n[grid]\nn = {n}\n",
        cutoff.max(1)
    );
    if physical {
        text += &format!("s = {s:?}\n");
        if let Some(eta) = eta {
            text += &format!("eta = {eta:?}\n");
        }
    }
    let mode = if physical { "physical" } else { "ideal" };
    text += &format!("[noon]\nmode = \"{mode}\"\n");
    text
}

fn execute(cfg: &Config) -> CliResult<u8> {
    let start = Instant::now();
    let table = run::run(cfg)?;
    let wall = start.elapsed();
    let workers = cfg.workers.unwrap_or_else(rayon::current_num_threads);
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| format!("{}.{}", cfg.experiment.name(), cfg.format.name()));
    let data = output::render(cfg, &table);
    let manifest = output::manifest(cfg, &table, &out, workers, wall);
    let manifest_text =
        serde_json::to_string_pretty(&manifest).expect("manifest is plain data") + "\n";
    let write_err = |path: &str| {
        let path = path.to_string();
        move |source| CliError::Write { path, source }
    };
    if out == "-" {
        std::io::stdout()
            .write_all(&data)
            .map_err(write_err("stdout"))?;
        std::io::stderr()
            .write_all(manifest_text.as_bytes())
            .map_err(write_err("stderr"))?;
    } else {
        std::fs::write(&out, &data).map_err(write_err(&out))?;
        let mpath = format!("{out}.manifest.json");
        std::fs::write(&mpath, manifest_text).map_err(write_err(&mpath))?;
        eprintln!(
            "wrote {} rows to {out} (manifest {mpath})",
            table.rows.len()
        );
    }
    let flagged = table.flagged();
    if flagged > 0 {
        for (i, r) in table
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.status != run::Status::Ok)
        {
            let note = r
                .note
                .as_deref()
                .map(|n| format!(": {n}"))
                .unwrap_or_default();
            eprintln!("row {i}: {}{note}", r.status.name());
        }
        eprintln!("{flagged} of {} rows flagged", table.rows.len());
        return Ok(3);
    }
    Ok(0)
}
