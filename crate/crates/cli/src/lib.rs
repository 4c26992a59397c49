//! Command-line front end: argument resolution, grid evaluation and
//! deterministic CSV/JSON output.

pub mod args;
pub mod output;
pub mod run;

use std::ffi::OsString;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

pub use args::{Cli, Command, Format, RunConfig};
pub use output::{Document, Meta};
pub use run::{run_table, Table};

/// Parses `argv`, runs, and maps failures to exit codes: 2 for malformed
/// input, 1 for numerical errors.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] berrylab_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Computes the table and writes the output file and any plot files.
pub fn execute(config: &RunConfig) -> Result<(), RunError> {
    let table = run_table(config)?;
    let meta = Meta::new(config);
    let text = match config.format {
        Format::Csv => output::to_csv(&meta, &table),
        Format::Json => output::to_json(&meta, &table),
    };
    match &config.output_path {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    let dir = config
        .output_path
        .as_deref()
        .and_then(Path::parent)
        .unwrap_or(Path::new("."));
    for spec in &config.plots {
        let data = output::plot_data(&table, spec).expect("plot columns validated");
        write_file(&output::plot_path(dir, &table, spec), &data)?;
    }
    Ok(())
}
