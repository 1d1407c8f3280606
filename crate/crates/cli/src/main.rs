use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use maxreg_cli::commands::{execute, exit_code};
use maxreg_cli::{Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start {jobs} worker threads: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match execute(&cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
