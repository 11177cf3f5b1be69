//! `scrutineer run`: execute one election from files.

use crate::{EXIT_ABORT, EXIT_PARSE};
use clap::Args;
use scrutineer::protocol::{run_election, ElectionError, Mode, RunOptions};
use scrutineer::rules::{parse_prime, read_ballots, ElectionConfig};
use std::path::PathBuf;

#[derive(Args)]
pub struct RunArgs {
    /// Election config file (key = value lines).
    #[arg(long, env = "SCRUTINEER_CONFIG")]
    config: PathBuf,
    /// Ballots file, one `voter_tag;s1,s2,...` per line.
    #[arg(long, env = "SCRUTINEER_BALLOTS")]
    ballots: PathBuf,
    /// Execution mode.
    #[arg(long, env = "SCRUTINEER_MODE", default_value = "simulate")]
    mode: String,
    /// Override the tallier count from the config.
    #[arg(long, env = "SCRUTINEER_TALLIERS")]
    talliers: Option<usize>,
    /// Override the prime from the config (p13, p31 or a prime integer).
    #[arg(long, env = "SCRUTINEER_PRIME")]
    prime: Option<String>,
    /// Session seed; fixes all randomness in simulate mode.
    #[arg(long, env = "SCRUTINEER_SEED", default_value_t = 1)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long, env = "SCRUTINEER_OUT")]
    out: Option<PathBuf>,
}

pub fn execute(args: RunArgs) -> i32 {
    let mode: Mode = match args.mode.parse() {
        Ok(mode) => mode,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let mut config = match ElectionConfig::from_file(&args.config) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    if let Some(d) = args.talliers {
        config.talliers = d;
    }
    if let Some(prime) = &args.prime {
        config.modulus = match parse_prime(prime) {
            Ok(modulus) => modulus,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_PARSE;
            }
        };
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return EXIT_PARSE;
    }
    let ballots = match read_ballots(&args.ballots) {
        Ok(ballots) => ballots,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };

    match run_election(
        &config,
        &ballots,
        &RunOptions {
            mode,
            seed: args.seed,
        },
    ) {
        Ok(result) => {
            let report = result.report_text();
            print!("{report}");
            if let Some(path) = &args.out {
                if let Err(e) = std::fs::write(path, &report) {
                    eprintln!("error: cannot write report: {e}");
                    return EXIT_ABORT;
                }
            }
            0
        }
        Err(e @ ElectionError::Config(_)) => {
            eprintln!("error: {e}");
            EXIT_PARSE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ABORT
        }
    }
}
