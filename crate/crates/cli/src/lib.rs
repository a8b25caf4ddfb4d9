//! Batch driver for the geometry engine: JSON jobs in, JSON reports out.

pub mod error;
pub mod job;
pub mod report;
pub mod run;

pub use error::CliError;
pub use job::{JobSpec, Overrides};
pub use report::RunReport;
pub use run::run;

/// 0 when every check passed, 1 when a residual exceeded its threshold, 2
/// when the job could not run.
pub fn exit_status(result: &Result<RunReport, CliError>) -> u8 {
    match result {
        Ok(r) if r.summary.all_pass => 0,
        Ok(_) => 1,
        Err(e) => e.exit_code(),
    }
}
