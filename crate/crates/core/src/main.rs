use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use effdiff::expcli::{
    bea_command, cell_command, reproduce, run_command, sweep_command, CliError, ExperimentConfig, RawConfig,
    ReproduceTarget, KEYS,
};

#[derive(Parser)]
#[command(name = "effdiff", version, about = "Effective diffusivity of passive tracers in 2D flows")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Preset scale for `reproduce`: desk or paper
    #[arg(long, global = true)]
    scale: Option<String>,
}

#[derive(Args)]
struct Overrides {
    /// `--key value` pairs; see `effdiff keys`
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one ensemble
    Run(Overrides),
    /// Sweep the Cartesian product of all `sweep.*` axes
    Sweep(Overrides),
    /// Solve the cell problem of a steady flow
    Cell(Overrides),
    /// Compare an integrator against its modified flow
    Bea(Overrides),
    /// Regenerate a reference table or figure data set
    Reproduce {
        /// One of table1, table2, fig2, fig3, fig4, fig5, fig6, fig8, cell
        target: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List configuration keys with defaults
    Keys,
}

fn user_config(global: &Global, overrides: &Overrides) -> Result<RawConfig, CliError> {
    let mut raw = match &global.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::new(),
    };
    if let Some(seed) = global.seed {
        raw.set("noise.seed", &seed.to_string())?;
    }
    if let Some(threads) = global.threads {
        raw.set("ensemble.threads", &threads.to_string())?;
    }
    if let Some(out) = &global.out {
        raw.set("output.out", &out.display().to_string())?;
    }
    if let Some(scale) = &global.scale {
        raw.set("output.scale", scale)?;
    }
    raw.apply_cli(&overrides.set)?;
    Ok(raw)
}

fn summarize(cfg: &ExperimentConfig) {
    let e = &cfg.ensemble;
    let params: Vec<String> = e.flow.params().iter().map(|(k, v)| format!("{k} = {v}")).collect();
    eprintln!(
        "flow {} ({}), scheme {} dt {}, sigma ({}, {}), {} particles to T = {}, seed {}",
        e.flow.family(),
        params.join(", "),
        e.scheme.kind.name(),
        e.scheme.tau,
        e.scheme.sigma[0],
        e.scheme.sigma[1],
        e.n_particles,
        e.horizon,
        e.seed
    );
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (overrides, target) = match &cli.command {
        Command::Keys => {
            let mut out = io::stdout().lock();
            for k in KEYS {
                let aliases = if k.aliases.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", k.aliases.join(", "))
                };
                let line = writeln!(out, "{:<22} {:<18} {}{}", k.name, k.default.unwrap_or("-"), k.doc, aliases);
                if matches!(&line, Err(e) if e.kind() == io::ErrorKind::BrokenPipe) {
                    break;
                }
                line?;
            }
            return Ok(Vec::new());
        }
        Command::Run(o) | Command::Sweep(o) | Command::Cell(o) | Command::Bea(o) => (o, None),
        Command::Reproduce { target, overrides } => (overrides, Some(target.parse::<ReproduceTarget>()?)),
    };
    let raw = user_config(&cli.global, overrides)?;
    let cfg = match target {
        Some(t) => t.config(&raw)?,
        None => ExperimentConfig::from_raw(raw)?,
    };
    summarize(&cfg);
    match (&cli.command, target) {
        (Command::Run(_), _) => Ok(vec![run_command(&cfg)?]),
        (Command::Sweep(_), _) => Ok(vec![sweep_command(&cfg)?]),
        (Command::Cell(_), _) => Ok(vec![cell_command(&cfg)?]),
        (Command::Bea(_), _) => Ok(vec![bea_command(&cfg)?]),
        (_, Some(t)) => reproduce(t, &cfg),
        _ => unreachable!("keys handled above"),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(files) => {
            let mut out = io::stdout().lock();
            for f in files {
                if writeln!(out, "{}", f.display()).is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
