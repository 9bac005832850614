use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use hermitizer_cli::commands::{run, tolerance_from_env, Cli, TOLERANCE_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = tolerance_from_env(std::env::var(TOLERANCE_ENV).ok().as_deref())
        .and_then(|tol| run(cli, &tol));
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            let _ = std::io::stdout().flush();
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
