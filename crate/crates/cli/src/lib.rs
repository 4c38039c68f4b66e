//! `qpt` — command-line front end of the gate simulator and tomography
//! toolkit.
//!
//! Four subcommands cover the pipeline: `simulate` (channel action on the
//! 16 tomography inputs), `tomography` (dataset synthesis plus
//! reconstruction), `analyze` (metrics and bar-chart renderings of a
//! stored process matrix), and `compare` (measured double gate vs. the
//! composed single-gate prediction). Every run writes its artifacts plus
//! a digest-bearing `manifest.json` into `--out`.
//!
//! Exit codes: 0 success, 2 configuration or argument error, 3 numerical
//! failure, 4 non-convergence of the likelihood fit (artifacts are still
//! written). Set `QPT_LOG=1` for progress lines on stderr.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod svg;

use args::{Cli, Command};
use ionsim_core::Error;
use std::sync::OnceLock;

/// Whether `QPT_LOG` asks for progress output ("0", "off", and the empty
/// string disable it; anything else enables it).
pub fn verbose() -> bool {
    static VERBOSE: OnceLock<bool> = OnceLock::new();
    *VERBOSE.get_or_init(|| {
        std::env::var("QPT_LOG")
            .map(|v| !matches!(v.as_str(), "" | "0" | "off"))
            .unwrap_or(false)
    })
}

/// Progress line on stderr, emitted only when [`verbose`] is set.
pub fn vlog(message: &str) {
    if verbose() {
        eprintln!("[qpt] {message}");
    }
}

/// Pin the rayon worker count when `--threads` is given. Results never
/// depend on it; only wall-clock time does.
fn init_threads(threads: Option<usize>) -> Result<(), Error> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Invalid(_) => 2,
        Error::Protocol(_) | Error::Numerical(_) => 3,
        Error::NonConvergence(_) => 4,
    }
}

/// Run one parsed command line to completion and return the process exit
/// code.
pub fn run(cli: Cli) -> i32 {
    let threads = match &cli.command {
        Command::Simulate(a) | Command::Tomography(a) => a.threads,
        Command::Analyze(a) => a.threads,
        Command::Compare(a) => a.threads,
    };
    let result = init_threads(threads).and_then(|()| match &cli.command {
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Tomography(a) => commands::cmd_tomography(a),
        Command::Analyze(a) => commands::cmd_analyze(a),
        Command::Compare(a) => commands::cmd_compare(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
