use std::process::ExitCode;

fn main() -> ExitCode {
    logstudy::cli::main()
}
