//! The `pirlab` command-line driver.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use pirlab_core::schemes::SchemeKind;
use pirlab_core::verifier::DEFAULT_ORACLE_CAP;

use commands::{CliError, EXIT_OK, EXIT_PRIVACY, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "pirlab",
    version,
    about = "Private information retrieval over coded storage with arbitrary collusion patterns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Tpir,
    Infoset,
    Partition,
    Striped,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Tpir => SchemeKind::Tpir,
            SchemeArg::Infoset => SchemeKind::InfoSet,
            SchemeArg::Partition => SchemeKind::Partition,
            SchemeArg::Striped => SchemeKind::StripedPartition,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DemoArg {
    TwoServer,
    #[value(name = "grs-5-2")]
    Grs52,
    #[value(name = "infoset-6-2")]
    Infoset62,
    #[value(name = "partition-6-3")]
    Partition63,
    #[value(name = "stripe-9-3")]
    Stripe93,
}

impl DemoArg {
    fn name(self) -> &'static str {
        match self {
            DemoArg::TwoServer => "two-server",
            DemoArg::Grs52 => "grs-5-2",
            DemoArg::Infoset62 => "infoset-6-2",
            DemoArg::Partition63 => "partition-6-3",
            DemoArg::Stripe93 => "stripe-9-3",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan the best information-set rate for the configured pattern.
    Rate {
        #[arg(long)]
        config: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one private retrieval and write the transcript.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// 0-based index of the requested file.
        #[arg(long)]
        file_index: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Collusion size for the tpir scheme (default: largest colluding set).
        #[arg(long)]
        t: Option<usize>,
    },
    /// Check privacy algebraically and by exact enumeration.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Largest per-factor randomness state space the oracle enumerates.
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP as u64)]
        oracle_cap: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        t: Option<usize>,
    },
    /// Run a built-in worked example end to end.
    Demo {
        #[arg(long, value_enum)]
        name: DemoArg,
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP as u64)]
        oracle_cap: u64,
    },
}

fn load_config(path: &Path) -> Result<config::ValidConfig, CliError> {
    Ok(config::load(path)?.validate()?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Rate { config, out: path } => {
            let cfg = load_config(&config)?;
            let result = commands::cmd_rate(&cfg)?;
            write!(out, "{}", result.text).ok();
            if let Some(path) = path {
                write_file(&path, &result.report.to_json())?;
            }
            Ok(EXIT_OK)
        }
        Command::Simulate {
            config,
            scheme,
            file_index,
            seed,
            out: path,
            t,
        } => {
            let cfg = load_config(&config)?;
            let result = commands::cmd_simulate(&cfg, scheme.into(), t, file_index, seed)?;
            write_file(&path, &result.report.to_json())?;
            write!(out, "{}", result.text).ok();
            Ok(EXIT_OK)
        }
        Command::Verify {
            config,
            scheme,
            oracle_cap,
            out: path,
            t,
        } => {
            let cfg = load_config(&config)?;
            let (result, overall) = commands::cmd_verify(&cfg, scheme.into(), t, oracle_cap as u128)?;
            write_file(&path, &result.report.to_json())?;
            write!(out, "{}", result.text).ok();
            Ok(if overall { EXIT_OK } else { EXIT_PRIVACY })
        }
        Command::Demo { name, oracle_cap } => {
            let (text, passed) = commands::cmd_demo(name.name(), oracle_cap as u128)?;
            write!(out, "{text}").ok();
            Ok(if passed { EXIT_OK } else { commands::EXIT_INTERNAL })
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                write!(err, "{rendered}").ok();
            } else {
                write!(out, "{rendered}").ok();
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            writeln!(err, "error: {}", e.message).ok();
            e.code
        }
    }
}
