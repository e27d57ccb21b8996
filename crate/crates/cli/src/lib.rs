//! Command-line front end for `bayes-rmst`: CSV ingestion, model fitting,
//! simulation studies, closed-form RMST evaluation and WAIC comparison.
//!
//! Every report is a JSON document holding the resolved configuration
//! together with the results; with `--output PATH` it is written to `PATH`
//! and a text table to `PATH` with a `.txt` extension.

pub mod args;
pub mod commands;
mod error;
pub mod ingest;
mod output;
pub mod report;

use std::path::Path;

use serde::Serialize;

pub use args::{Cli, Command};
pub use error::{CliError, Result, RowError};
pub use output::write_atomic;

fn emit<T: Serialize>(report: &T, text: String, output: Option<&Path>) -> Result<String> {
    if let Some(path) = output {
        let table = path.with_extension("txt");
        if table == path {
            return Err(CliError::Usage("--output must not end in .txt".into()));
        }
        let mut json = serde_json::to_string_pretty(report)?;
        json.push('\n');
        output::write_all_atomic(&[(path, json.as_bytes()), (&table, text.as_bytes())])?;
    }
    Ok(text)
}

/// Runs one subcommand and returns the text table for the terminal.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Fit(a) => {
            let r = commands::fit(a)?;
            emit(&r, report::fit_text(&r), a.output.as_deref())
        }
        Command::Simulate(a) => {
            let r = commands::simulate(a)?;
            emit(&r, report::simulate_text(&r), a.output.as_deref())
        }
        Command::Rmst(a) => {
            let r = commands::rmst(a)?;
            emit(&r, report::rmst_text(&r), a.output.as_deref())
        }
        Command::Waic(a) => {
            let r = commands::waic_compare(a)?;
            emit(&r, report::waic_text(&r), a.output.as_deref())
        }
        Command::Generate(a) => {
            let n = commands::generate(a)?;
            Ok(format!("wrote {n} rows to {}\n", a.output.display()))
        }
    }
}
