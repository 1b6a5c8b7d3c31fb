mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use bpc_core::{Error, ErrorCategory};
use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return write_stdout(&e.render().to_string());
        }
        Err(e) => {
            // clap renders several lines; keep the first so stderr stays one line
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[Usage]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(ErrorCategory::Usage.exit_code());
        }
    };

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error[Usage]: cannot configure {n} threads: {e}");
            return ExitCode::from(ErrorCategory::Usage.exit_code());
        }
    }

    match commands::run(&cli) {
        Ok(output) => write_stdout(&output),
        Err(e) => report(&e),
    }
}

fn write_stdout(output: &str) -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(output.as_bytes()).and_then(|()| stdout.flush()) {
        // a closed pipe (e.g. `| head`) is not an error
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => report(&Error::Io(e)),
    }
}

fn report(e: &Error) -> ExitCode {
    let message = e.to_string().replace('\n', " ");
    eprintln!("error[{}]: {message}", e.code());
    ExitCode::from(e.category().exit_code())
}
