use std::process::ExitCode;

use lrmt::cli::main_with;
use lrmt::commands::Context;

fn main() -> ExitCode {
    let ctx = Context::from_env();
    let code = main_with(std::env::args_os(), &ctx, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code)
}
