//! Command-line layer over `qmetro-core`: argument parsing, per-N parallel
//! evaluation and deterministic CSV / JSON tables.

pub mod cli;
pub mod commands;
pub mod error;
pub mod output;

pub use cli::{Cli, Format};
pub use error::{CliError, CliResult};
pub use output::Table;

/// Render a table in the requested format.
pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

/// Worker count from `QMETRO_THREADS`; `None` leaves rayon's default.
pub fn thread_cap(var: Option<&str>) -> CliResult<Option<usize>> {
    match var {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(error::param(format!("QMETRO_THREADS must be a positive integer, got `{s}`"))),
        },
    }
}
