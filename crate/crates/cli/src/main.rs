use std::process::ExitCode;

fn main() -> ExitCode {
    trendcap::commands::main_with_args(std::env::args_os())
}
