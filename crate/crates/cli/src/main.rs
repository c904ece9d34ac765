mod config;
mod error;
mod output;
mod pipeline;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Pipeline, Settings, KEYS};
use error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(
    name = "bcsgl",
    version,
    about = "Critical temperature, Ginzburg-Landau coefficients and critical-field slope of a BCS pair potential",
    after_help = config_help()
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Critical temperature, eigenvalue trace and gap profile
    Tc,
    /// tc plus Lambda0, Lambda2, the critical-field slope and the T_c(B) line
    Gl,
    /// gl plus the comparison with the WHH expansion
    Whh,
    /// Spectrum of the Landau-level operator R for the pair density
    Landau,
    /// Run the identity suite and print a pass/fail table
    Verify,
}

impl From<Command> for Pipeline {
    fn from(c: Command) -> Self {
        match c {
            Command::Tc => Pipeline::Tc,
            Command::Gl => Pipeline::Gl,
            Command::Whh => Pipeline::Whh,
            Command::Landau => Pipeline::Landau,
            Command::Verify => Pipeline::Verify,
        }
    }
}

// Numeric flags stay strings so malformed values are reported like malformed config values.
#[derive(Args, Debug, Default)]
struct Flags {
    /// Config file of key = value lines
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [results]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Output formats, any of json,csv,svg [json,csv]
    #[arg(long, global = true, value_name = "LIST")]
    format: Option<String>,
    /// Chemical potential
    #[arg(long, global = true, value_name = "X", allow_hyphen_values = true)]
    mu: Option<String>,
    /// Analytic potential as kind:strength:range
    #[arg(long, global = true, value_name = "SPEC")]
    potential: Option<String>,
    /// Tabulated potential file
    #[arg(long, global = true, value_name = "PATH")]
    table: Option<String>,
    /// Field strengths for the T_c(B) line
    #[arg(long = "B", global = true, value_name = "LIST")]
    fields: Option<String>,
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn config_help() -> String {
    let mut s = String::from("Config keys (flags override the file):\n");
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<16} {d}\n"));
    }
    s.push_str("\nExit codes: 0 success, 2 conflicting settings, 3 missing input, 4 I/O error,\n");
    s.push_str("5 numerical failure or failed verification, 6 malformed or unknown setting.");
    s
}

fn settings(flags: &Flags) -> Result<Settings> {
    let mut s = match &flags.config {
        Some(path) => Settings::from_path(path)?,
        None => Settings::default(),
    };
    let overrides = [
        ("out", &flags.out),
        ("format", &flags.format),
        ("mu", &flags.mu),
        ("potential", &flags.potential),
        ("table", &flags.table),
        ("B", &flags.fields),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            s.set(key, v.clone());
        }
    }
    Ok(s)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = settings(&cli.flags)?.resolve(cli.command.map(Pipeline::from))?;
    log::debug!("{cfg:?}");
    let run = pipeline::run(&cfg)?;
    for path in run.results.emit(&cfg.out, cfg.formats)? {
        log::info!("wrote {}", path.display());
    }
    if run.failed_checks > 0 {
        let total = run.results.scalars.iter().find(|(k, _)| k == "checks_total").map_or(0, |(_, v)| *v as usize);
        return Err(CliError::VerificationFailed {
            failed: run.failed_checks,
            total,
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 6 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.flags.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bcsgl: {e}");
            e.into()
        }
    }
}
