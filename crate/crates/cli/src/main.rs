use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(bloomtax_cli::run(std::env::args()) as u8)
}
