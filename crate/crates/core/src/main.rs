use std::io::Write;
use std::process::ExitCode;

use rbb::cli::{parse_args, run, run_to_dir, Invocation, RunError, HELP};

fn main() -> ExitCode {
    let config = match parse_args(std::env::args().skip(1)) {
        Ok(Invocation::Help) => {
            print!("{HELP}");
            return ExitCode::SUCCESS;
        }
        Ok(Invocation::Run(c)) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match config.out() {
        Some(dir) => run_to_dir(&config, &dir).map(|(_, paths)| {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }),
        None => run(&config).map(|out| {
            let mut stdout = std::io::stdout().lock();
            let many = out.artifacts.len() > 1;
            for a in out.artifacts {
                if many {
                    let _ = writeln!(stdout, "# {}.csv", a.name);
                }
                let _ = stdout.write_all(a.csv.as_bytes());
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
