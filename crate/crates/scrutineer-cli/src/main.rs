//! Command-line driver: run elections from files, generate synthetic
//! electorates, and benchmark the secure kernels.
//!
//! Exit codes: 0 success, 2 parse/config errors, 3 protocol aborts.

mod bench;
mod gen;
mod run;

use clap::{Parser, Subcommand};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "scrutineer",
    version,
    about = "Secure tallying for score-based voting rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an election from a config file and a ballots file.
    Run(run::RunArgs),
    /// Generate a synthetic electorate (and optionally its config).
    Gen(gen::GenArgs),
    /// Benchmark comparison, verification or whole-election runs.
    Bench(bench::BenchArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run::execute(args),
        Command::Gen(args) => gen::execute(args),
        Command::Bench(args) => bench::execute(args),
    };
    std::process::exit(code);
}
