//! Batch jobs behind the `logme` binary: pooling token stores, scoring
//! feature stores, ranking models and correlating scores with observed
//! performance.
//!
//! Exit codes: 0 success, 1 partial failure (`rank` only), 2 invalid input.
//! Failures are printed to standard error as one JSON object per line.

pub mod args;
pub mod correlate;
pub mod failure;
pub mod pool;
pub mod rank;
pub mod score;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use args::{Cli, Command};
pub use failure::{Failure, Outcome, EXIT_INVALID, EXIT_PARTIAL, EXIT_SUCCESS};

/// Run metadata; the timestamp is the only field that differs between
/// otherwise identical runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub timestamp: Option<String>,
}

impl Meta {
    pub fn now() -> Self {
        let ts = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        Self { timestamp: Some(ts) }
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

/// Fails with `NotFound` unless `path` exists.
pub fn require_input(path: &Path) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::new("NotFound", format!("{} does not exist", path.display())))
    }
}

/// Sizes the global thread pool. Has no effect without the `parallel`
/// feature or when the pool is already initialized.
pub fn configure_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

pub const THREADS_ENV: &str = "LOGME_THREADS";

/// Thread count from the flag, else the environment variable.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, Failure> {
    match (flag, env) {
        (Some(n), _) => Ok(Some(n)),
        (None, Some(v)) => args::parse_threads(v)
            .map(Some)
            .map_err(|e| Failure::new("InvalidArgument", format!("{THREADS_ENV}: {e}"))),
        (None, None) => Ok(None),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let env = std::env::var(THREADS_ENV).ok();
    configure_threads(resolve_threads(cli.threads, env.as_deref())?);
    match &cli.command {
        Command::Pool(a) => pool::run(a),
        Command::Score(a) => score::run(a),
        Command::Rank(a) => rank::run(a),
        Command::Correlate(a) => correlate::run(a),
    }
}

/// Runs the command, reports any failure on standard error and returns the
/// process exit code.
pub fn run_and_report(cli: &Cli) -> u8 {
    match run(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(failure) => {
            eprintln!("{}", failure.to_json_line());
            EXIT_INVALID
        }
    }
}
