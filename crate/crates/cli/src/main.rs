use std::process::ExitCode;

use clap::Parser;

use collres_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) if outcome.passed => ExitCode::SUCCESS,
        Ok(outcome) => {
            let worst = outcome.summary.oracle.as_ref().map_or(f64::NAN, |o| o.worst_relative);
            let report = serde_json::json!({
                "error": "tolerance",
                "message": format!("worst relative difference {worst:e} exceeds tolerance {:e}", cli.tolerance),
            });
            eprintln!("{report}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{}", e.structured());
            ExitCode::FAILURE
        }
    }
}
