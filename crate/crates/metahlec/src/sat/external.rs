//! Running an external DIMACS solver as a drop-in back end.
//!
//! The contract follows the SAT-competition conventions: the solver is
//! invoked with the CNF file as its last argument, exits with status
//! 10 for satisfiable and 20 for unsatisfiable, and prints the model
//! on `v ` lines terminated by `0`. A claimed model is re-checked
//! against the problem before it is accepted; a solver whose model
//! fails that check is reported as an error, not trusted.

use std::io::Write as _;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use super::{dimacs, Model, SatOutcome, SatProblem};

static FILE_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("failed to write CNF file: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver `{command}` exited with unexpected status {status:?}")]
    UnexpectedExit { command: String, status: Option<i32> },
    #[error("solver claimed sat but printed no usable `v` lines")]
    MissingModel,
    #[error("token `{0}` in a `v` line is not a literal")]
    BadModelToken(String),
    #[error("solver claimed sat but its model violates the formula")]
    UnsoundModel,
}

/// Solves `problem` by handing a DIMACS dump to `command` (a program
/// name plus leading arguments, whitespace-separated).
pub fn solve_with_external(
    problem: &SatProblem,
    command: &str,
) -> Result<SatOutcome, ExternalError> {
    let mut parts = command.split_whitespace();
    let program = parts.next().unwrap_or(command);
    let args: Vec<&str> = parts.collect();

    let dir = std::env::temp_dir();
    let serial = FILE_COUNTER.fetch_add(1, Ordering::Relaxed);
    let file = dir.join(format!("metahlec-{}-{serial}.cnf", std::process::id()));
    let mut f = std::fs::File::create(&file)?;
    f.write_all(dimacs::to_dimacs(problem).as_bytes())?;
    drop(f);

    let output = Command::new(program).args(&args).arg(&file).output();
    let _ = std::fs::remove_file(&file);
    let output = output?;

    match output.status.code() {
        Some(10) => {
            let stdout = String::from_utf8_lossy(&output.stdout);
            let model = parse_model(&stdout, problem.num_vars())?;
            if !model.satisfies(problem) {
                return Err(ExternalError::UnsoundModel);
            }
            Ok(SatOutcome::Sat(model))
        }
        Some(20) => Ok(SatOutcome::Unsat),
        code => {
            Err(ExternalError::UnexpectedExit { command: command.to_string(), status: code })
        }
    }
}

fn parse_model(stdout: &str, num_vars: u32) -> Result<Model, ExternalError> {
    let mut values = vec![false; num_vars as usize];
    let mut saw_any = false;
    for line in stdout.lines() {
        let Some(rest) = line.strip_prefix("v ").or_else(|| line.strip_prefix("v\t")) else {
            continue;
        };
        for token in rest.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| ExternalError::BadModelToken(token.to_string()))?;
            if value == 0 {
                continue;
            }
            saw_any = true;
            let var = (value.unsigned_abs() - 1) as usize;
            if var < values.len() {
                values[var] = value > 0;
            }
        }
    }
    if !saw_any && num_vars > 0 {
        return Err(ExternalError::MissingModel);
    }
    Ok(Model::new(values))
}
