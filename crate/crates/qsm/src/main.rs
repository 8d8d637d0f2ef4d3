use std::process::ExitCode;

fn main() -> ExitCode {
    qsm::cli::main()
}
