//! Command-line front end for `junction-core`: configuration files, reports,
//! CSV sweeps and SVG plots.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;
pub mod table;

use args::{Cli, Command};
use config::{load_junction, ConfigError};
use junction_core::{builtin_example, JunctionSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid junction:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Config(_)
            | CliError::Invalid(_)
            | CliError::Write { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// What the binary prints.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
}

fn load(cli: &Cli) -> Result<JunctionSpec, CliError> {
    match &cli.common.config {
        Some(path) => Ok(load_junction(path)?),
        None => Ok(builtin_example()),
    }
}

fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.into(),
        source,
    })
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let spec = load(cli)?;
    let common = &cli.common;
    let render = |r: &report::RunReport| {
        if common.json {
            r.to_json()
        } else {
            r.to_text()
        }
    };
    let mut out = Output::default();
    match &cli.command {
        Command::Spectrum => {
            let (mut r, t) = commands::timed(common.timing, || commands::spectrum(&spec))?;
            r.timing_seconds = t;
            out.stdout = render(&r);
        }
        Command::Resonance {
            select,
            shift_constant,
        } => {
            let (mut r, t) = commands::timed(common.timing, || {
                commands::resonance(&spec, select, *shift_constant)
            })?;
            r.timing_seconds = t;
            out.stdout = render(&r);
        }
        Command::Sweep {
            min,
            max,
            steps,
            method,
            select,
            out: csv_path,
            svg,
        } => {
            let (mut s, t) = commands::timed(common.timing, || {
                commands::with_threads(common.threads, || {
                    commands::sweep(&spec, (*min, *max, *steps), *method, select, svg.is_some())
                })?
            })?;
            s.report.timing_seconds = t;
            if let (Some(path), Some(plot)) = (svg, &s.svg) {
                write_file(path, plot)?;
            }
            match csv_path {
                Some(path) => {
                    write_file(path, &s.csv)?;
                    out.stdout = render(&s.report);
                }
                None => {
                    out.stdout = s.csv;
                    out.stderr = render(&s.report);
                }
            }
        }
        Command::Bc {
            select,
            lambda_f,
            halfwidth,
            tol,
            assignment,
        } => {
            let (mut r, t) = commands::timed(common.timing, || {
                commands::bc(&spec, select, *lambda_f, *halfwidth, *tol, *assignment)
            })?;
            r.timing_seconds = t;
            out.stdout = render(&r);
        }
    }
    Ok(out)
}
