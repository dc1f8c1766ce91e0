use std::process::ExitCode;

fn main() -> ExitCode {
    let status = hyperalg::cli::main_with(std::env::args_os());
    ExitCode::from(status.code() as u8)
}
