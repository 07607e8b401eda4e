//! Command-line front end of `collres`: scans, residue maps, distance sweeps,
//! oracle checks and the reference-figure presets, written as CSV and SVG.

pub mod args;
pub mod csv;
pub mod error;
pub mod run;
pub mod svg;

pub use args::Cli;
pub use error::{CliError, Result};
pub use run::{run, Outcome, Summary};

/// Runs `cli` on `cli.jobs` worker threads, or on the global pool.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?
            .install(|| run(cli)),
        None => run(cli),
    }
}
