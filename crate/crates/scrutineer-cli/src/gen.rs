//! `scrutineer gen`: deterministic synthetic electorates, with an optional
//! adversarial fraction of documented illegal-ballot shapes.

use crate::EXIT_PARSE;
use clap::Args;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use scrutineer::rules::{parse_prime, rule_by_name, write_ballots, Ballot, ElectionConfig};
use scrutineer::sharing::VoterTag;
use std::path::PathBuf;

#[derive(Args)]
pub struct GenArgs {
    /// Voting rule: plurality, range, approval, veto or borda.
    #[arg(long)]
    rule: String,
    /// Number of voters.
    #[arg(long)]
    voters: usize,
    /// Number of candidates.
    #[arg(long)]
    candidates: usize,
    /// Number of winners K.
    #[arg(long, default_value_t = 1)]
    winners: usize,
    /// Range maximum L (range rule only).
    #[arg(long)]
    range_max: Option<u64>,
    /// Tallier count recorded in the emitted config.
    #[arg(long, env = "SCRUTINEER_TALLIERS", default_value_t = 3)]
    talliers: usize,
    /// Field prime recorded in the emitted config.
    #[arg(long, env = "SCRUTINEER_PRIME", default_value = "p13")]
    prime: String,
    #[arg(long, env = "SCRUTINEER_SEED", default_value_t = 1)]
    seed: u64,
    /// Fraction of voters casting an illegal ballot, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    adversarial_fraction: f64,
    /// Ballots file to write.
    #[arg(long, env = "SCRUTINEER_OUT")]
    out: PathBuf,
    /// Also write a matching election config here.
    #[arg(long)]
    config_out: Option<PathBuf>,
}

pub fn execute(args: GenArgs) -> i32 {
    let Some(rule) = rule_by_name(&args.rule) else {
        eprintln!("error: unknown rule '{}'", args.rule);
        return EXIT_PARSE;
    };
    if !(0.0..=1.0).contains(&args.adversarial_fraction) {
        eprintln!("error: adversarial fraction must lie in [0, 1]");
        return EXIT_PARSE;
    }
    let modulus = match parse_prime(&args.prime) {
        Ok(modulus) => modulus,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let names: Vec<String> = (0..args.candidates).map(|i| format!("C{i:02}")).collect();
    let config = match ElectionConfig::new(
        rule.kind(),
        names,
        args.voters,
        args.winners,
        args.range_max,
        args.talliers,
        modulus,
    ) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };

    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(args.seed);
    let adversarial_count = (args.adversarial_fraction * args.voters as f64).round() as usize;
    let mut adversarial = vec![false; args.voters];
    let mut order: Vec<usize> = (0..args.voters).collect();
    order.shuffle(&mut rng);
    for &idx in order.iter().take(adversarial_count) {
        adversarial[idx] = true;
    }

    let ballots: Vec<Ballot> = (0..args.voters)
        .map(|i| {
            let voter_tag = VoterTag(format!("v{i:05}"));
            if adversarial[i] {
                Ballot {
                    voter_tag,
                    scores: rule.sample_illegal_scores(&config, &mut rng),
                }
            } else {
                let choice = rule.sample_choice(&config, &mut rng);
                rule.make_ballot(&config, voter_tag, &choice)
                    .expect("sampled choices are well-formed")
            }
        })
        .collect();

    if let Err(e) = write_ballots(&args.out, &ballots) {
        eprintln!("error: cannot write ballots: {e}");
        return EXIT_PARSE;
    }
    if let Some(path) = &args.config_out {
        if let Err(e) = std::fs::write(path, config.to_config_string()) {
            eprintln!("error: cannot write config: {e}");
            return EXIT_PARSE;
        }
    }
    println!(
        "wrote {} ballots ({} adversarial) to {}",
        ballots.len(),
        adversarial_count,
        args.out.display()
    );
    0
}
