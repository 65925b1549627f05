use std::process::ExitCode;

fn main() -> ExitCode {
    nilmas::cli::main_with(std::env::args_os())
}
