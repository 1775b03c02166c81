use std::io::{self, Write};
use std::process::ExitCode;

use lore_cli::{run, Env, EXIT_ENVIRONMENT};

fn main() -> ExitCode {
    let env = match Env::from_process() {
        Ok(env) => env,
        Err(e) => {
            let _ = writeln!(io::stderr(), "lore: error[io]: cannot determine the current directory: {e}");
            return ExitCode::from(EXIT_ENVIRONMENT as u8);
        }
    };
    let stdin = io::stdin();
    let code = run(
        std::env::args_os(),
        &env,
        &mut stdin.lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
