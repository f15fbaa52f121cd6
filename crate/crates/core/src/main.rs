use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    match worldline_piston::cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("piston: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
