//! `vibrakit`: modal, static, bolt shear and random vibration checks from
//! the command line.
//!
//! Exit status: 0 success, 1 a requirement failed, 2 bad input, 3 the
//! solver failed.

mod bolts;
mod modal;
mod output;
mod randvib;
mod simplify;
mod statics;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vibrakit_core::fea::FeaError;
use vibrakit_core::model::{parse_deck, ConstraintSet, Model};

use output::Format;

/// Environment variable capping the free DOFs of any solve.
pub const MAX_DOF_VAR: &str = "VIBRAKIT_MAX_DOF";

#[derive(Parser)]
#[command(name = "vibrakit", version, about = "Structural verification checks for small satellites")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normal modes with effective mass and the minimum-frequency check.
    Modal(modal::Args),
    /// Quasi-static acceleration cases: peak stress and margins of safety.
    Static(statics::Args),
    /// Maximum bolt shear per bolt group, from a deck solve or a punch file.
    Boltshear(bolts::ShearArgs),
    /// Random vibration: Grms, Miles' equation, response magnification.
    Randvib {
        #[command(subcommand)]
        command: randvib::Command,
    },
    /// Bolt length against the helicoil engagement rule.
    Boltcheck(bolts::CheckArgs),
    /// Equivalent density of a simplified panel.
    Simplify(simplify::Args),
}

/// Text of a finished command and whether every requirement held.
pub struct Report {
    pub text: String,
    pub pass: bool,
}

impl Report {
    pub fn pass(text: String) -> Self {
        Report { text, pass: true }
    }
}

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl fmt::Display) -> Self {
        Failure { code: 2, message: message.to_string() }
    }

    pub fn solver(message: impl fmt::Display) -> Self {
        Failure { code: 3, message: message.to_string() }
    }

    /// Size-guard refusals are input problems; everything else the kernel
    /// reports is a solver failure.
    pub fn fea(e: &FeaError) -> Self {
        match e {
            FeaError::TooManyDofs { .. } => Failure::input(format!("{e} (set by {MAX_DOF_VAR})")),
            _ => Failure::solver(e),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub fn read_deck(path: &Path) -> Result<Model, Failure> {
    parse_deck(&read_text(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Named sets, or the deck's only set when none is named.
pub fn pick_constraints<'m>(model: &'m Model, names: &[String]) -> Result<Vec<&'m ConstraintSet>, Failure> {
    if names.is_empty() {
        return match model.constraint_sets.as_slice() {
            [only] => Ok(vec![only]),
            [] => Err(Failure::input("deck defines no constraint set")),
            sets => {
                let all: Vec<&str> = sets.iter().map(|s| s.name.as_str()).collect();
                Err(Failure::input(format!("deck defines several constraint sets ({}); pick with --constraint", all.join(", "))))
            }
        };
    }
    names
        .iter()
        .map(|n| model.constraint_set(n).ok_or_else(|| Failure::input(format!("no constraint set {n} in deck"))))
        .collect()
}

pub fn max_dofs() -> Result<Option<usize>, Failure> {
    match std::env::var(MAX_DOF_VAR) {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::input(format!("{MAX_DOF_VAR}={v:?} is not a whole number"))),
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let f = cli.format;
    match &cli.command {
        Command::Modal(a) => modal::run(a, f),
        Command::Static(a) => statics::run(a, f),
        Command::Boltshear(a) => bolts::run_shear(a, f),
        Command::Randvib { command } => randvib::run(command, f),
        Command::Boltcheck(a) => bolts::run_check(a, f),
        Command::Simplify(a) => simplify::run(a, f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &report.text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", report.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
