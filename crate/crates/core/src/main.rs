use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(localcast::cli::run(std::env::args()) as u8)
}
