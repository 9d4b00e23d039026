use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use spinpath_cli::{run, Cli, CliError};

fn fail(err: &CliError) -> ExitCode {
    let json = serde_json::to_string(&err.report()).expect("error report serializes");
    eprintln!("{json}");
    ExitCode::from(if matches!(err, CliError::Usage(_)) { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.to_string().trim_end().to_string())),
    };
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.stdout.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
