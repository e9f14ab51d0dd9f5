// Negated comparisons such as `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;

use args::{Cli, Command};
use commands::Sink;
use error::{usage, CliError};

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(format!("cannot configure the thread pool: {e}")))?;
    }
    let out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut sink = Sink { out, format: cli.format, seed: cli.seed };
    let result = match &cli.command {
        Command::Pmf(a) => commands::pmf(a, &mut sink),
        Command::Sample(a) => commands::sample(a, &mut sink),
        Command::Fit(a) => commands::fit(a, &mut sink),
        Command::Rate(a) => commands::rate(a, &mut sink),
        Command::Predict(a) => commands::predict(a, &mut sink),
    };
    // Flush before reporting a failed check so the report is still written.
    sink.out.flush()?;
    result
}

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors and 0 for --help.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let label = match e {
                CliError::Usage(_) => "usage error",
                CliError::Core(_) => "error",
                CliError::CheckFailed(_) => "acceptance check",
            };
            eprintln!("pitman: {label}: {e}");
            e.exit_code()
        }
    }
}
