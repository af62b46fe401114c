use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(warped_soliton_cli::run(std::env::args_os()))
}
