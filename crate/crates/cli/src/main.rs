use std::process::ExitCode;

fn main() -> ExitCode {
    sidelink_sim::main_with_args(std::env::args_os())
}
