//! Argument parsing and dispatch for the `hyperalg` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, CommandError, Report, Status};
use crate::config::{Command, RunConfig};
use crate::verify::Poison;

#[derive(Debug, Parser)]
#[command(name = "hyperalg", version, about = "Search, construct and certify hypercyclic-algebra witnesses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run the identity suites of the symbolic models.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Inject a fault into one identity check.
        #[arg(long, value_enum)]
        poison: Option<Poison>,
    },
    /// Find and certify the parameters of one construction.
    Search(Common),
    /// Build witnesses, scan N and write the transcript.
    Demo(Common),
    /// Tabulate A_{d,N,s} and its normalised growth.
    Asymptotics(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (JSON). Repeat it to run several demos.
    #[arg(long, value_name = "FILE")]
    pub config: Vec<PathBuf>,
    /// Seed for randomised checks; overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for independent demo runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

fn print_report(label: Option<&str>, report: &Report) {
    for line in &report.summary {
        match label {
            Some(l) => println!("[{l}] {line}"),
            None => println!("{line}"),
        }
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
}

fn fail(e: &CommandError) -> Status {
    eprintln!("error: {e}");
    e.status()
}

fn load_one(common: &Common, expected: Command) -> Result<RunConfig, Status> {
    let [path] = common.config.as_slice() else {
        eprintln!("error: exactly one --config is required");
        return Err(Status::ConfigError);
    };
    let cfg = RunConfig::load(path).map_err(|e| fail(&e.into()))?;
    if cfg.command != expected {
        eprintln!("error: config is for '{:?}', not '{:?}'", cfg.command, expected);
        return Err(Status::ConfigError);
    }
    Ok(cfg)
}

fn seed_of(common: &Common, cfg: Option<&RunConfig>) -> u64 {
    common.seed.or(cfg.and_then(|c| c.seed)).unwrap_or(0)
}

fn run_demo(cfg: &RunConfig, seed: u64, out: &std::path::Path, label: Option<&str>) -> Status {
    match commands::demo(cfg, seed, out) {
        Ok((report, _)) => {
            print_report(label, &report);
            report.status
        }
        Err(e) => fail(&e),
    }
}

fn demos(common: &Common) -> Status {
    if common.config.is_empty() {
        eprintln!("error: --config is required");
        return Status::ConfigError;
    }
    if common.config.len() == 1 {
        return match load_one(common, Command::Demo) {
            Ok(cfg) => run_demo(&cfg, seed_of(common, Some(&cfg)), &common.out, None),
            Err(s) => s,
        };
    }
    // several demos: each writes into its own subdirectory
    let mut loaded = Vec::new();
    for path in &common.config {
        match RunConfig::load(path) {
            Ok(cfg) if cfg.command == Command::Demo => {
                let stem = path.file_stem().map_or_else(|| "demo".into(), |s| s.to_string_lossy().into_owned());
                loaded.push((stem, cfg));
            }
            Ok(_) => {
                eprintln!("error: {} is not a demo config", path.display());
                return Status::ConfigError;
            }
            Err(e) => return fail(&e.into()),
        }
    }
    let jobs = common.jobs.max(1);
    let mut statuses = vec![Status::Success; loaded.len()];
    std::thread::scope(|scope| {
        for (chunk, out) in loaded.chunks(loaded.len().div_ceil(jobs)).zip(statuses.chunks_mut(loaded.len().div_ceil(jobs))) {
            scope.spawn(move || {
                for ((stem, cfg), status) in chunk.iter().zip(out) {
                    *status = run_demo(cfg, seed_of(common, Some(cfg)), &common.out.join(stem), Some(stem));
                }
            });
        }
    });
    statuses.into_iter().max().unwrap_or(Status::Success)
}

pub fn run(cli: Cli) -> Status {
    match cli.command {
        CliCommand::Verify { common, poison } => {
            let cfg = match common.config.len() {
                0 => None,
                _ => match load_one(&common, Command::Verify) {
                    Ok(c) => Some(c),
                    Err(s) => return s,
                },
            };
            match commands::verify(seed_of(&common, cfg.as_ref()), poison, &common.out) {
                Ok((report, _)) => {
                    print_report(None, &report);
                    report.status
                }
                Err(e) => fail(&e),
            }
        }
        CliCommand::Search(common) => {
            let cfg = match load_one(&common, Command::Search) {
                Ok(c) => c,
                Err(s) => return s,
            };
            match commands::search(&cfg, seed_of(&common, Some(&cfg)), &common.out) {
                Ok((report, _)) => {
                    print_report(None, &report);
                    report.status
                }
                Err(e) => fail(&e),
            }
        }
        CliCommand::Demo(common) => demos(&common),
        CliCommand::Asymptotics(common) => {
            let cfg = match load_one(&common, Command::Asymptotics) {
                Ok(c) => c,
                Err(s) => return s,
            };
            match commands::asymptotics(&cfg, &common.out) {
                Ok((report, _)) => {
                    print_report(None, &report);
                    report.status
                }
                Err(e) => fail(&e),
            }
        }
    }
}

/// Parses `args` and runs; usage errors map to the config-error status.
pub fn main_with<I, T>(args: I) -> Status
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                Status::ConfigError
            } else {
                Status::Success
            }
        }
    }
}
