use clap::Parser;
use faultfuse::cli::{run, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::OracleMismatch(_) => 1,
                _ => 2,
            }
        }
    };
    std::process::exit(code);
}
