use std::process::ExitCode;

use clap::Parser;
use fermiqit_cli::commands::{run, Cli};
use fermiqit_cli::error::{EXIT_OK, EXIT_PARSE};
use fermiqit_cli::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share the parse exit code; clap's default 2 would read as an SSR violation
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE } else { EXIT_OK } as u8);
        }
    };
    let result = run(&cli).and_then(|text| match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
