//! Batch front-end of the `fracdiff` binary.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::validation::Status;
pub use commands::SUITES;
pub use config::{apply_override, RunConfig, DEFAULT_CONFIG};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fracdiff", version, about = "Distributed-order fractional diffusion on an interval")]
pub struct Cli {
    /// Run configuration (TOML); the shipped default when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set mc.paths=1000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues (and optionally eigenfunctions) of the basis.
    Eigen {
        #[arg(long)]
        phi: bool,
    },
    /// h(t, λ) on the t and λ grids.
    HEval,
    /// Series solution on the t and x grids.
    Solve,
    /// Monte Carlo solution on the t and x grids.
    Simulate,
    /// Scaled CTRW counts along the c-ladder.
    Ctrw,
    /// Run a validation suite, or `all`.
    Validate { suite: String },
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Eigen { .. } => "eigen".into(),
            Command::HEval => "h-eval".into(),
            Command::Solve => "solve".into(),
            Command::Simulate => "simulate".into(),
            Command::Ctrw => "ctrw".into(),
            Command::Validate { suite } => format!("validate {suite}"),
        }
    }
}

/// Loads the configuration named by the flags, with `--seed`, `--out` and
/// every `--set` applied in that order.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let src = match &cli.config {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let mut overrides = Vec::new();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(o) = &cli.out {
        overrides.push(format!("out={}", toml::Value::String(o.display().to_string())));
    }
    overrides.extend(cli.overrides.iter().cloned());
    RunConfig::from_str_with(&src, &overrides)
}

fn execute(cli: &Cli) -> Result<Status> {
    let cfg = load_config(cli)?;
    if let Command::Validate { suite } = &cli.command {
        if suite != "all" && !SUITES.contains(&suite.as_str()) {
            return Err(Error::Config(format!("unknown suite `{suite}` (one of {}, all)", SUITES.join(", "))));
        }
    }
    fs::create_dir_all(&cfg.out)?;
    let out = cfg.out.as_path();
    let outcome = match &cli.command {
        Command::Eigen { phi } => commands::eigen(&cfg, out, *phi)?,
        Command::HEval => commands::h_eval(&cfg, out)?,
        Command::Solve => commands::solve(&cfg, out)?,
        Command::Simulate => commands::simulate(&cfg, out)?,
        Command::Ctrw => commands::ctrw(&cfg, out)?,
        Command::Validate { suite } => commands::validate(&cfg, out, suite)?,
    };
    let summary = format!(
        "command: {}\nstatus: {}\n\n{}\n[effective config]\n{}",
        cli.command.name(),
        outcome.status.as_str(),
        outcome.summary,
        cfg.effective
    );
    fs::write(out.join("summary.txt"), &summary)?;
    print!("{}", outcome.summary);
    Ok(outcome.status)
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(s) => exit_code(s),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
