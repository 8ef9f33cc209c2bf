use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(locc_trace_cli::run(std::env::args_os()))
}
