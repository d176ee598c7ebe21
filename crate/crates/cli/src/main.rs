use std::process::ExitCode;

fn main() -> ExitCode {
    let code = intertwine_cli::run(std::env::args_os());
    ExitCode::from(code)
}
