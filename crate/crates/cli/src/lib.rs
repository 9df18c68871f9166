//! Pipelines, configs and artifacts for the `lzeros` command.

pub mod config;
pub mod heatmap;
pub mod report;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use report::RunReport;
pub use run::{execute, Command, Options};

/// Process exit status for a failed run: 2 for config errors, 3 for
/// numerical non-convergence, 1 for anything else (I/O).
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<lzeros::Error>() {
            use lzeros::Error::*;
            return match e {
                NonConvergent { .. } | ThetaNonConvergent { .. } | SingularK { .. } | IllConditioned(_) => 3,
                Io(_) => 1,
                _ => 2,
            };
        }
    }
    1
}
