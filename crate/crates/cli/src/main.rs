use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use finsler_cli::{exit_status, run, CliError, JobSpec, Overrides, RunReport};

/// Runs a JSON job and writes its JSON report.
///
/// Exit status: 0 when every check passes, 1 when some residual exceeds its
/// threshold, 2 for schema, input or domain errors.
#[derive(Parser)]
#[command(name = "finsler", version)]
struct Args {
    /// Job document.
    #[arg(long)]
    job: PathBuf,
    /// Report path; defaults to the job's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample seed, replacing the job's.
    #[arg(long)]
    seed: Option<u64>,
    /// Classification and nullity tolerance, replacing the job's.
    #[arg(long)]
    tol: Option<f64>,
    /// Jet order, replacing the job's.
    #[arg(long)]
    order: Option<usize>,
}

fn execute(args: &Args) -> Result<RunReport, CliError> {
    let mut job = JobSpec::load(&args.job)?;
    job.apply(Overrides {
        seed: args.seed,
        tol: args.tol,
        order: args.order,
    });
    job.validate()?;
    let report = run(&job)?;
    let text = report.to_json();
    match args.out.as_ref().or(job.output.as_ref()) {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    for c in report.checks.iter().filter(|c| !c.passed()) {
        eprintln!(
            "FAIL {}: residual {:e} >= {:e}",
            c.name,
            c.residual.unwrap_or(f64::NAN),
            c.threshold
        );
    }
    Ok(report)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = execute(&args);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_status(&result))
}
