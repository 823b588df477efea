use std::panic;
use std::process::ExitCode;

use atomgrid_cli::{report, run, CliError};

fn main() -> ExitCode {
    // Panics are reported as JSON like every other failure.
    panic::set_hook(Box::new(|_| {}));
    let code = panic::catch_unwind(|| run(std::env::args_os())).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        report(&CliError::Internal(msg))
    });
    ExitCode::from(code as u8)
}
