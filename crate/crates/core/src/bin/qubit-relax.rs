use std::process::ExitCode;

fn main() -> ExitCode {
    qubit_relax::cli::main_with_args(std::env::args_os())
}
