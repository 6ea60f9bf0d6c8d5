//! Command-line front end for the polydisc metric verification library.
//!
//! Each command resolves a [`CampaignConfig`] (defaults, then `--config`
//! file, then flags), runs one cell per metric parameter combination, and
//! emits a JSON [`Report`]. `emit-indicatrix` emits CSV instead.

pub mod config;
pub mod error;
pub mod indicatrix;
pub mod report;
pub mod run;

pub use config::{CampaignArgs, CampaignConfig, Cli, CliCommand, CommandKind, ConfigFile};
pub use error::{CliError, Result};
pub use report::{CellReport, GridCell, Report, WorstCase};
pub use run::{run, Outcome};

/// Resolves, runs and writes one command. Returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let (kind, args) = cli.command.split();
    let outcome = CampaignConfig::resolve(kind, args).and_then(|config| {
        let outcome = run(&config)?;
        report::write_output(config.out.as_deref(), &outcome.output)?;
        Ok(outcome)
    });
    match outcome {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
