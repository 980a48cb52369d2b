use std::path::PathBuf;
use std::process::ExitCode;

use brst_lab::report::{run, Command, RunError};
use brst_lab::system::{read_system_file, validate, LoadError};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "brst-lab", version, about = "BRST certification reports for finite-dimensional constraint systems")]
struct Args {
    /// What to compute; `all` runs every stage.
    #[arg(value_enum)]
    command: Command,
    /// Constraint-system JSON file.
    #[arg(long)]
    system: PathBuf,
    /// Operator tolerance, overriding the file and the default.
    #[arg(long)]
    tol: Option<f64>,
    /// JSON report (default).
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Human-readable report.
    #[arg(long)]
    text: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("brst-lab: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    // usage errors are configuration errors, not clap's default exit code 2
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let file = match read_system_file(&args.system) {
        Ok(f) => f,
        Err(e) => return fail(1, e),
    };
    let sys = match validate(&file) {
        Ok(s) => s,
        Err(v) => return fail(1, LoadError::Invalid(v)),
    };
    let mut tol = sys.tolerances;
    if let Some(t) = args.tol {
        if !(t.is_finite() && t > 0.0) {
            return fail(1, format!("--tol must be positive, got {t}"));
        }
        tol.operator = t;
    }
    let report = match run(args.command, &sys, &tol) {
        Ok(r) => r,
        Err(e @ RunError::Invalid(_)) | Err(e @ RunError::Core(_)) => return fail(e.exit_code() as u8, e),
    };
    let body = if args.text { report.to_text() } else { report.to_json() };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                return fail(1, format!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{body}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
