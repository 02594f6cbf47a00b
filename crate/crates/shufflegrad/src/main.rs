use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    ExitCode::from(shufflegrad::cli::dispatch(&argv) as u8)
}
