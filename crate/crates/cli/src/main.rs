mod args;
mod commands;
mod config;

use std::fmt;
use std::process::ExitCode;

use tracing_subscriber::filter::LevelFilter;

/// Marks an error as bad input or configuration (exit code 2).
#[derive(Debug)]
pub struct Invalid(String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(e: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(Invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match config::parse_with_config(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(e) => {
            // clap prints usage; help and version exit 0, errors exit 2.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level: LevelFilter = match cli.global.log_level.parse() {
        Ok(l) => l,
        Err(_) => {
            eprintln!("{{\"level\":\"ERROR\",\"error\":\"unknown log level {:?}\",\"exit_code\":2}}", cli.global.log_level);
            return ExitCode::from(2);
        }
    };
    tracing_subscriber::fmt()
        .json()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .with_current_span(false)
        .init();

    match commands::run(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = if e.chain().any(|c| c.is::<Invalid>()) { 2 } else { 1 };
            tracing::error!(error = %format!("{e:#}"), exit_code = code, command = cli.command.name(), "command failed");
            ExitCode::from(code)
        }
    }
}
