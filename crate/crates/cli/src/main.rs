use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gmaxent_cli::{run, Cli, CliError};
use log::LevelFilter;

fn init_logging() {
    let level = match std::env::var("GMAXENT_LOG").as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        _ => LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(out) => match &cli.output {
            Some(path) => match std::fs::write(path, &out.text) {
                Ok(()) => out.code,
                Err(source) => report(&CliError::Write {
                    path: path.clone(),
                    source,
                }),
            },
            None => {
                let mut stdout = std::io::stdout().lock();
                let mut text = out.text;
                if !text.ends_with('\n') {
                    text.push('\n');
                }
                // A closed pipe downstream is not our failure.
                let _ = stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush());
                out.code
            }
        },
        Err(e) => report(&e),
    };
    ExitCode::from(code as u8)
}

fn report(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
