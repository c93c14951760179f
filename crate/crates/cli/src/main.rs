use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let outcome = satglass_cli::run_cli(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    let _ = err.flush();
    ExitCode::from(outcome.exit_code as u8)
}
