use clap::Parser;
use qecsim_cli::config::CliError;
use qecsim_cli::dispatch::{dispatch, flush_stdout, Cli};
use qecsim_cli::{EXIT_INTERNAL, EXIT_USAGE};

fn main() {
    // clap exits 2 on bad flags and 0 on --help/--version by itself.
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
    };
    flush_stdout();
    std::process::exit(code as i32);
}
