use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use couplecheck::commands::{self, CoupleKind, ReportFormat, EXIT_INVALID};

/// Exact couplings and contextuality verdicts for context-content systems.
///
/// Exit codes: 0 success or noncontextual, 1 parse/validation failure,
/// 2 structural mismatch, 3 contextual verdict.
#[derive(Parser)]
#[command(name = "couplecheck", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Machine,
}

impl From<Format> for ReportFormat {
    fn from(format: Format) -> ReportFormat {
        match format {
            Format::Text => ReportFormat::Text,
            Format::Machine => ReportFormat::Machine,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Independent,
    Identity,
    Maximal,
    Targets,
}

impl From<Kind> for CoupleKind {
    fn from(kind: Kind) -> CoupleKind {
        match kind {
            Kind::Independent => CoupleKind::Independent,
            Kind::Identity => CoupleKind::Identity,
            Kind::Maximal => CoupleKind::Maximal,
            Kind::Targets => CoupleKind::Targets,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a system file against every invariant.
    Validate { path: PathBuf },
    /// Run the full contextuality analysis of a cyclic 2x2 system file.
    Analyze {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Construct a coupling of the system, or report INFEASIBLE.
    Couple {
        path: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Targets file for --kind targets: one '<content> : <p/q>' per line.
        #[arg(long)]
        targets: Option<PathBuf>,
    },
    /// Emit a preset scenario as a system file and analyze it when possible.
    Demo {
        scenario: String,
        /// Write the system file here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_INVALID as u8)
    })
}

fn finish(output: commands::CommandOutput) -> ExitCode {
    print!("{}", output.text);
    ExitCode::from(output.code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { path } => match read(&path) {
            Ok(text) => finish(commands::run_validate(&text)),
            Err(code) => code,
        },
        Command::Analyze { path, format } => match read(&path) {
            Ok(text) => finish(commands::run_analyze(&text, format.into())),
            Err(code) => code,
        },
        Command::Couple {
            path,
            kind,
            targets,
        } => {
            let text = match read(&path) {
                Ok(text) => text,
                Err(code) => return code,
            };
            let targets_text = match targets {
                Some(ref target_path) => match read(target_path) {
                    Ok(text) => Some(text),
                    Err(code) => return code,
                },
                None => None,
            };
            finish(commands::run_couple(
                &text,
                kind.into(),
                targets_text.as_deref(),
            ))
        }
        Command::Demo {
            scenario,
            out,
            format,
        } => match commands::run_demo(&scenario, format.into()) {
            Ok(demo) => {
                match out {
                    Some(path) => {
                        if let Err(e) = std::fs::write(&path, &demo.file_text) {
                            eprintln!("cannot write {}: {e}", path.display());
                            return ExitCode::from(EXIT_INVALID as u8);
                        }
                    }
                    None => {
                        print!("{}", demo.file_text);
                        println!();
                    }
                }
                finish(demo.report)
            }
            Err(output) => finish(output),
        },
    }
}
