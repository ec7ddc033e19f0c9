use std::process::ExitCode;

fn main() -> ExitCode {
    detmax_lab::run(std::env::args_os())
}
