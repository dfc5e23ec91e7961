//! Command line front end: argument parsing, file formats and run reports.

pub mod args;
pub mod commands;
pub mod io;
pub mod report;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command};
use commands::Internal;
use io::Inputs;
use report::{RunReport, Timer};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

fn execute(cli: &Cli, argv: &[String]) -> Result<RunReport> {
    let seed = match &cli.command {
        Command::Eval(a) => a.seed,
        Command::Diversify(a) => a.seed,
        Command::Compare(a) => a.seed,
        Command::Convert(a) => a.seed,
        Command::Bench(a) => a.seed,
    };
    let mut report = RunReport::new(argv.to_vec(), seed);
    let mut inputs = Inputs::default();
    let mut timer = Timer::default();
    report.payload = match &cli.command {
        Command::Eval(a) => commands::eval(a, &mut inputs, &mut timer)?,
        Command::Diversify(a) => commands::diversify(a, &mut inputs, &mut timer)?,
        Command::Compare(a) => commands::compare(a, &mut inputs, &mut timer)?,
        Command::Convert(a) => commands::convert(a, &mut inputs, &mut timer)?,
        Command::Bench(a) => commands::bench(a, &mut timer)?,
    };
    report.inputs = inputs.digests;
    report.timings = timer.timings;
    Ok(report)
}

/// Runs the tool on `argv` (program name first), printing the report to
/// stdout and diagnostics to stderr. Returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match catch_unwind(AssertUnwindSafe(|| execute(&cli, &argv))) {
        Ok(Ok(report)) => match serde_json::to_string_pretty(&report) {
            Ok(text) => {
                let _ = writeln!(std::io::stdout().lock(), "{text}");
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: cannot serialize the report: {e}");
                EXIT_INTERNAL
            }
        },
        Ok(Err(e)) if e.downcast_ref::<Internal>().is_some() => {
            eprintln!("internal error: {e:#}");
            EXIT_INTERNAL
        }
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
        Err(_) => {
            eprintln!("internal error: the run panicked");
            EXIT_INTERNAL
        }
    }
}
