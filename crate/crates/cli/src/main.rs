use std::process::ExitCode;

fn main() -> ExitCode {
    match udleak::parse_args(std::env::args_os()) {
        Ok(plan) => ExitCode::from(udleak::run_plan(&plan)),
        Err(udleak::CliError::Clap(e)) => {
            let code = if e.use_stderr() {
                udleak::EXIT_PARSE
            } else {
                udleak::EXIT_OK
            };
            let _ = e.print();
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
