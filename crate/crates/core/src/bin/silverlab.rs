use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = silverlab::cli::run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    let _ = err.flush();
    ExitCode::from(code as u8)
}
