use clap::Parser;
use rmlab_cli::app::{AppError, ExitStatus};
use rmlab_cli::config::SCHEMA_HELP;
use rmlab_cli::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::Usage.code() } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let status = match rmlab_cli::run(&cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e:#}");
            if let AppError::Usage(_) = e {
                eprintln!("\n{SCHEMA_HELP}");
            }
            e.status()
        }
    };
    std::process::exit(status.code());
}
