//! Command-line front end: `ctrw <experiment> --config FILE [--seed S]
//! [--out FILE] [--workers W]`. Writes the experiment's CSV and prints a one-line
//! JSON summary. Exit status: 0 pass, 1 fail or runtime error, 2 bad usage or
//! bad configuration.

pub mod config;
pub mod experiments;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
pub use config::ExperimentConfig;
pub use experiments::{run_experiment, Command, Outcome};
pub use table::ResultTable;

#[derive(Debug, Parser)]
#[command(
    name = "ctrw",
    version,
    about = "Monte Carlo checks of CTRW scaling limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Residual order statistics of the jumps against the series limit.
    ResidualOrder(RunArgs),
    /// Backward and forward CTRW positions against their limits.
    LimitCompare(RunArgs),
    /// Undershoot and overshoot of the tight coupling against the renewal oracle.
    Arcsine(RunArgs),
    /// Window counts of the marked point processes.
    Mpp(RunArgs),
    /// Kolmogorov-type maximal inequality at stopping times.
    Kolmogorov(RunArgs),
    /// Renewal mean against its asymptote.
    RenewalMean(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's base_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; defaults to the config's output, then `<experiment>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::ResidualOrder(a) => (Command::ResidualOrder, a),
            Sub::LimitCompare(a) => (Command::LimitCompare, a),
            Sub::Arcsine(a) => (Command::Arcsine, a),
            Sub::Mpp(a) => (Command::Mpp, a),
            Sub::Kolmogorov(a) => (Command::Kolmogorov, a),
            Sub::RenewalMean(a) => (Command::RenewalMean, a),
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `args` (including the program name), runs the experiment and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let (command, args) = cli.command.split();
    match execute(command, &args) {
        Ok(outcome) => {
            let _ = writeln!(stdout, "{}", outcome.summary_json());
            if outcome.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            }
        }
    }
}

fn execute(command: Command, args: &RunArgs) -> Result<Outcome> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if args.workers == Some(0) {
        return Err(Error::Config("--workers must be >= 1".into()));
    }
    let outcome = run_experiment(command, &config, args.workers)?;
    let path = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name())));
    outcome.table.save(&path)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["ctrw"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["ctrw", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["ctrw", "mpp"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["ctrw", "--help"]);
        assert_eq!(code, EXIT_PASS);
        assert!(out.contains("renewal-mean"));
    }

    #[test]
    fn missing_config_file_is_a_config_error() {
        let (code, _, err) = run_args(&["ctrw", "mpp", "--config", "/nonexistent/cfg.json"]);
        assert_eq!(code, EXIT_USAGE, "{err}");
    }

    #[test]
    fn wrong_experiment_name_is_a_config_error() {
        let dir = std::env::temp_dir().join(format!("ctrw-cli-unit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("k.json");
        std::fs::write(&cfg, r#"{"experiment": "kolmogorov", "replicates": 10}"#).unwrap();
        let c = cfg.to_str().unwrap();
        assert_eq!(run_args(&["ctrw", "mpp", "--config", c]).0, EXIT_USAGE);
        // right name, missing section
        assert_eq!(
            run_args(&["ctrw", "kolmogorov", "--config", c]).0,
            EXIT_USAGE
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
