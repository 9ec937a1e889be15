use std::process::ExitCode;

fn main() -> ExitCode {
    kc_cli::commands::main_with_args(std::env::args_os())
}
