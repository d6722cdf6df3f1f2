use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(weylpair::cli::run(std::env::args_os()))
}
