mod args;
mod commands;
mod table;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Why a run stopped; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration (exit 2).
    Validation(String),
    /// The numerics did not produce a trustworthy result (exit 3).
    Numerical(String),
}

impl From<cvqkd_core::Error> for Failure {
    fn from(e: cvqkd_core::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    macro_rules! go {
        ($run:expr, $cmd:path) => {{
            let resolved = $run.resolve()?;
            let format = resolved.shared.format();
            let out = resolved.shared.out.clone();
            let table = $cmd(resolved)?;
            (table, format, out)
        }};
    }
    let (table, format, out) = match cli.command {
        Command::Point(r) => go!(r, commands::point),
        Command::Fig1(r) => go!(r, commands::fig1),
        Command::Fig2(r) => go!(r, commands::fig2),
        Command::Fig3(r) => go!(r, commands::fig3),
        Command::Fig4(r) => go!(r, commands::fig4),
        Command::Fig5(r) => go!(r, commands::fig5),
        Command::Optimize(r) => go!(r, commands::optimize),
        Command::Calibrate(r) => go!(r, commands::calibrate),
    };
    let mut sink: Box<dyn Write> = match out.as_deref() {
        None | Some("-") => Box::new(std::io::stdout().lock()),
        Some(path) => Box::new(
            File::create(path).map_err(|e| Failure::Validation(format!("cannot create {path}: {e}")))?,
        ),
    };
    let mut w = BufWriter::new(&mut sink);
    table
        .write(format, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Failure::Validation(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
