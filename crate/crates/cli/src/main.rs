mod args;
mod commands;
mod config;
mod render;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use config::RunConfig;

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let config = match RunConfig::from_command(&cli.command) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let outcome = match commands::run(&config) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let text = outcome.table.render(config.format);

    if let Some((path, bits)) = &outcome.bits_export {
        let written = File::create(path)
            .map_err(wavebench_core::Error::from)
            .and_then(|f| wavebench_core::oqpsk::write_bits(BufWriter::new(f), bits));
        if let Err(e) = written {
            return fail(format!("--export-bits {}: {e}", path.display()));
        }
    }
    let written = match &config.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        return fail(format!("writing output: {e}"));
    }
    ExitCode::from(outcome.exit_code)
}
