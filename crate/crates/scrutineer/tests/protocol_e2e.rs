//! End-to-end election runs against the plaintext oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use scrutineer::field::PrimeModulus;
use scrutineer::protocol::{
    run_election, ElectionError, Mode, RejectReason, RunOptions, VerdictOutcome,
};
use scrutineer::rules::{
    plaintext_tally, plaintext_winners, rule_for, Ballot, ElectionConfig, RuleKind, TieBreak,
};
use scrutineer::sharing::VoterTag;

fn names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("C{i:02}")).collect()
}

fn config(
    rule: RuleKind,
    n: usize,
    m: usize,
    k: usize,
    l: Option<u64>,
    d: usize,
    modulus: PrimeModulus,
) -> ElectionConfig {
    ElectionConfig::new(rule, names(m), n, k, l, d, modulus).unwrap()
}

fn ballot(tag: &str, scores: Vec<u64>) -> Ballot {
    Ballot {
        voter_tag: VoterTag::from(tag),
        scores,
    }
}

fn oracle_winners(cfg: &ElectionConfig, accepted: &[Ballot]) -> Vec<usize> {
    let tally = plaintext_tally(cfg, accepted).unwrap();
    plaintext_winners(&tally, cfg.winners, TieBreak::LowestIndex)
}

fn random_legal_ballots(cfg: &ElectionConfig, n: usize, rng: &mut ChaCha20Rng) -> Vec<Ballot> {
    let rule = rule_for(cfg.rule);
    (0..n)
        .map(|i| {
            let choice = rule.sample_choice(cfg, rng);
            rule.make_ballot(cfg, VoterTag(format!("v{i:04}")), &choice)
                .unwrap()
        })
        .collect()
}

#[test]
fn three_voter_plurality() {
    let cfg = config(
        RuleKind::Plurality,
        3,
        3,
        1,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let ballots = vec![
        ballot("a", vec![1, 0, 0]),
        ballot("b", vec![1, 0, 0]),
        ballot("c", vec![0, 1, 0]),
    ];
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 1,
        },
    )
    .unwrap();
    assert_eq!(result.winner_indices, vec![0]);
    assert_eq!(result.winner_names, vec!["C00"]);
    assert_eq!(result.accepted_count(), 3);
}

#[test]
fn borda_election_with_injected_cheat() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let cfg = config(
        RuleKind::Borda,
        50,
        8,
        3,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let mut ballots = random_legal_ballots(&cfg, 49, &mut rng);
    // voter 49 casts a duplicate-score ballot
    ballots.push(ballot("v9999", vec![0, 1, 2, 3, 4, 6, 6, 6]));

    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 2,
        },
    )
    .unwrap();

    assert_eq!(result.accepted_count(), 49);
    let rejected: Vec<_> = result.rejected().collect();
    assert_eq!(rejected.len(), 1);
    assert_eq!(rejected[0].voter_tag, "v9999");
    match &rejected[0].outcome {
        VerdictOutcome::Rejected { reason, recovered } => {
            assert_eq!(*reason, RejectReason::DuplicateScores);
            assert_eq!(recovered, &vec![0, 1, 2, 3, 4, 6, 6, 6]);
        }
        other => panic!("expected rejection, got {other:?}"),
    }
    assert_eq!(result.winner_indices, oracle_winners(&cfg, &ballots[..49]));
}

#[test]
fn plurality_scale_cheat_rejected_with_evidence() {
    let cfg = config(
        RuleKind::Plurality,
        10,
        4,
        1,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let ballots = vec![
        ballot("honest1", vec![0, 1, 0, 0]),
        ballot("honest2", vec![0, 1, 0, 0]),
        // the classic boost: N votes for candidate 0
        ballot("cheater", vec![10, 0, 0, 0]),
    ];
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 3,
        },
    )
    .unwrap();
    assert_eq!(result.accepted_count(), 2);
    let rejected: Vec<_> = result.rejected().collect();
    assert_eq!(rejected[0].voter_tag, "cheater");
    match &rejected[0].outcome {
        VerdictOutcome::Rejected { reason, recovered } => {
            assert_eq!(*reason, RejectReason::EntryOutOfRange);
            assert_eq!(recovered, &vec![10, 0, 0, 0]);
        }
        other => panic!("expected rejection, got {other:?}"),
    }
    // the cheat did not help: candidate 1 wins
    assert_eq!(result.winner_indices, vec![1]);
}

#[test]
fn every_rule_matches_oracle_on_random_elections() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for (round, &kind) in RuleKind::ALL.iter().enumerate() {
        for reps in 0..3 {
            let m = rng.random_range(2..=6);
            let n = rng.random_range(1..=15);
            let k = rng.random_range(1..=m.min(3));
            let l = (kind == RuleKind::Range).then(|| rng.random_range(1..=5));
            let cfg = config(kind, n, m, k, l, 3, PrimeModulus::MERSENNE_13);
            let ballots = random_legal_ballots(&cfg, n, &mut rng);
            let seed = (round * 10 + reps) as u64;
            let result = run_election(
                &cfg,
                &ballots,
                &RunOptions {
                    mode: Mode::Simulate,
                    seed,
                },
            )
            .unwrap();
            assert_eq!(result.accepted_count(), n, "{kind} all legal accepted");
            assert_eq!(
                result.winner_indices,
                oracle_winners(&cfg, &ballots),
                "{kind} n={n} m={m} k={k}"
            );
        }
    }
}

#[test]
fn equal_seeds_give_identical_transcripts_and_reports() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let cfg = config(
        RuleKind::Approval,
        8,
        5,
        2,
        None,
        5,
        PrimeModulus::MERSENNE_13,
    );
    let ballots = random_legal_ballots(&cfg, 8, &mut rng);
    let opts = RunOptions {
        mode: Mode::Simulate,
        seed: 42,
    };
    let a = run_election(&cfg, &ballots, &opts).unwrap();
    let b = run_election(&cfg, &ballots, &opts).unwrap();
    assert_eq!(a.transcripts, b.transcripts);
    assert_eq!(a.report_text(), b.report_text());

    let c = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 43,
        },
    )
    .unwrap();
    assert_eq!(a.winner_indices, c.winner_indices);
    assert_ne!(a.transcripts, c.transcripts);
}

#[test]
fn network_mode_agrees_with_simulate_mode() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let cfg = config(RuleKind::Veto, 6, 4, 1, None, 3, PrimeModulus::MERSENNE_13);
    let mut ballots = random_legal_ballots(&cfg, 5, &mut rng);
    ballots.push(ballot("cheat", vec![1, 1, 1, 1]));

    let sim = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 7,
        },
    )
    .unwrap();
    let net = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Network,
            seed: 7,
        },
    )
    .unwrap();
    assert_eq!(sim.winner_indices, net.winner_indices);
    assert_eq!(sim.verdicts, net.verdicts);
    assert_eq!(sim.winner_indices, oracle_winners(&cfg, &ballots[..5]));
}

#[test]
fn empty_election_aborts() {
    let cfg = config(
        RuleKind::Plurality,
        5,
        3,
        1,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let result = run_election(
        &cfg,
        &[],
        &RunOptions {
            mode: Mode::Simulate,
            seed: 8,
        },
    );
    assert!(matches!(result, Err(ElectionError::EmptyElection)));
}

#[test]
fn duplicate_tag_keeps_first_ballot() {
    let cfg = config(
        RuleKind::Plurality,
        5,
        3,
        1,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let ballots = vec![
        ballot("dup", vec![0, 0, 1]),
        ballot("dup", vec![1, 0, 0]),
        ballot("x", vec![0, 1, 0]),
    ];
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 9,
        },
    )
    .unwrap();
    assert_eq!(result.verdicts.len(), 2);
    // only dup's FIRST ballot counts: candidates 2 and 1 tie at one vote,
    // tie-break gives index 1
    assert_eq!(result.winner_indices, vec![1]);
}

#[test]
fn abstention_where_legal_is_accepted() {
    let cfg = config(
        RuleKind::Range,
        4,
        3,
        1,
        Some(5),
        3,
        PrimeModulus::MERSENNE_13,
    );
    let ballots = vec![ballot("a", vec![0, 0, 0]), ballot("b", vec![0, 3, 1])];
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 10,
        },
    )
    .unwrap();
    assert_eq!(result.accepted_count(), 2);
    assert_eq!(result.winner_indices, vec![1]);
}

#[test]
fn disclosure_log_holds_only_declared_kinds() {
    use scrutineer::mpc::DisclosureKind;
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let cfg = config(
        RuleKind::Borda,
        12,
        5,
        2,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let mut ballots = random_legal_ballots(&cfg, 11, &mut rng);
    ballots.push(ballot("zz-cheat", vec![0, 0, 2, 3, 4]));
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 11,
        },
    )
    .unwrap();
    assert!(!result.disclosures.is_empty());
    for (kind, values) in &result.disclosures {
        match kind {
            DisclosureKind::ComparisonBit => {
                assert!(values.iter().all(|&v| v <= 1), "comparison bits are bits")
            }
            DisclosureKind::ValidationVerdict | DisclosureKind::Output => {}
        }
    }
}

#[test]
fn tie_break_prefers_lowest_index() {
    let cfg = config(
        RuleKind::Plurality,
        4,
        3,
        1,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    // two votes each for candidates 0 and 1
    let ballots = vec![
        ballot("a", vec![1, 0, 0]),
        ballot("b", vec![1, 0, 0]),
        ballot("c", vec![0, 1, 0]),
        ballot("d", vec![0, 1, 0]),
    ];
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 12,
        },
    )
    .unwrap();
    assert_eq!(result.winner_indices, vec![0]);
}

#[test]
fn reconciliation_drops_voters_not_accepted_everywhere() {
    use scrutineer::mpc::{run_simulated, MpcError, SessionParams};
    use scrutineer::protocol::reconcile;
    use std::collections::BTreeMap;

    // voter "b" reached only talliers 1 and 2; the intersection drops it
    let sets: Vec<Vec<&str>> = vec![vec!["a", "b", "c"], vec!["a", "b", "c"], vec!["a", "c"]];
    let params = SessionParams::new(PrimeModulus::MERSENNE_13, 3, 77);
    let runs = run_simulated::<_, MpcError, _>(&params, |engine| {
        let mine: BTreeMap<String, ()> = sets[(engine.me() - 1) as usize]
            .iter()
            .map(|s| (s.to_string(), ()))
            .collect();
        reconcile(engine, mine.keys())
    })
    .unwrap();
    for run in runs {
        assert_eq!(run.result, vec!["a".to_string(), "c".to_string()]);
    }
}

#[test]
fn reconciliation_divergence_aborts() {
    use scrutineer::mpc::{run_simulated, MpcError, SessionParams};
    use scrutineer::protocol::reconcile;
    use std::collections::BTreeMap;

    // tallier 2 deviates from the agreed protocol by recomputing the
    // digest over a doctored set; everyone must abort
    let params = SessionParams::new(PrimeModulus::MERSENNE_13, 3, 78);
    let result = run_simulated::<(), MpcError, _>(&params, |engine| {
        let tags: Vec<String> = if engine.me() == 2 {
            vec!["a".into(), "rogue".into()]
        } else {
            vec!["a".into()]
        };
        let mine: BTreeMap<String, ()> = tags.into_iter().map(|t| (t, ())).collect();
        // deviant digest: tallier 2 confirms its own set instead of the
        // intersection, which the digest exchange must catch
        if engine.me() == 2 {
            use scrutineer::transport::MessageKind;
            let _ = engine.exchange_bytes(MessageKind::VoterSet, b"a\nrogue")?;
            let digest: [u8; 32] = {
                use sha2::{Digest, Sha256};
                Sha256::new().chain_update(b"a\nrogue").finalize().into()
            };
            let _ = engine.exchange_bytes(MessageKind::VoterSet, &digest)?;
            return Err(MpcError::Abort("deviant tallier".into()));
        }
        reconcile(engine, mine.keys()).map(|_| ())
    });
    assert!(matches!(result, Err(MpcError::Abort(_))));
}

#[test]
fn transcripts_carry_plaintext_only_in_evidence_records() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let cfg = config(
        RuleKind::Plurality,
        8,
        4,
        1,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let mut ballots = random_legal_ballots(&cfg, 7, &mut rng);
    ballots.push(ballot("zz-cheat", vec![8, 0, 0, 0]));
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 13,
        },
    )
    .unwrap();
    for transcript in &result.transcripts {
        for line in transcript.lines() {
            let known_shape = line.starts_with("tallier ")
                || line.starts_with("round ")
                || line.starts_with("reveal ")
                || line.starts_with("open ")
                || line.starts_with("note ")
                || line.starts_with("stats ")
                || line.starts_with("sent-digest ");
            assert!(known_shape, "unexpected transcript line: {line}");
            // recovered ballots appear only inside evidence notes
            if line.contains("ballot=") {
                assert!(line.contains("rejection-evidence"), "{line}");
            }
        }
    }
    // the election still names the right winner over the 7 honest ballots
    assert_eq!(result.winner_indices, oracle_winners(&cfg, &ballots[..7]));
}

#[test]
fn nine_tallier_election_end_to_end() {
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let cfg = config(
        RuleKind::Range,
        10,
        4,
        2,
        Some(5),
        9,
        PrimeModulus::MERSENNE_31,
    );
    let mut ballots = random_legal_ballots(&cfg, 9, &mut rng);
    ballots.push(ballot("zz-over", vec![6, 0, 0, 0]));
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 14,
        },
    )
    .unwrap();
    assert_eq!(result.accepted_count(), 9);
    assert_eq!(result.winner_indices, oracle_winners(&cfg, &ballots[..9]));
}

// Test-harness-only check: the reshared aggregate reconstructs to the
// plaintext tally. A real election never opens these values.
#[test]
fn reshared_aggregate_opens_to_plaintext_tally() {
    use scrutineer::mpc::{run_simulated, DisclosureKind, MpcError, SessionParams};
    use scrutineer::protocol::additive_aggregate;
    use scrutineer::sharing::additive_share;
    use std::collections::BTreeMap;

    let mut rng = ChaCha20Rng::seed_from_u64(15);
    for round in 0..20 {
        let kind = RuleKind::ALL[round % 5];
        let m = rng.random_range(2..=8usize);
        let n = rng.random_range(1..=25usize);
        let l = (kind == RuleKind::Range).then(|| rng.random_range(1..=5));
        let cfg = config(kind, n, m, 1, l, 3, PrimeModulus::MERSENNE_13);
        let ballots = random_legal_ballots(&cfg, n, &mut rng);
        let tally = plaintext_tally(&cfg, &ballots).unwrap();

        // voter phase at the sharing level
        let mut per_tallier: Vec<BTreeMap<String, Vec<_>>> = vec![BTreeMap::new(); 3];
        for ballot in &ballots {
            let entries: Vec<_> = ballot.scores.iter().map(|&s| cfg.modulus.elem(s)).collect();
            for share in additive_share(&entries, 3, &ballot.voter_tag, &mut rng).unwrap() {
                per_tallier[(share.tallier_index - 1) as usize]
                    .insert(share.voter_tag.0.clone(), share.entries);
            }
        }
        let aggregates: Vec<Vec<_>> = per_tallier
            .iter()
            .map(|shares| additive_aggregate(shares, cfg.modulus, m))
            .collect();

        let params = SessionParams::new(cfg.modulus, 3, 100 + round as u64);
        let runs = run_simulated::<_, MpcError, _>(&params, |engine| {
            let mine = &aggregates[(engine.me() - 1) as usize];
            let reshared = engine.input_additive(mine)?;
            let opened = engine.open_batch(&reshared, DisclosureKind::Output)?;
            Ok(opened.iter().map(|v| v.value()).collect::<Vec<_>>())
        })
        .unwrap();
        for run in runs {
            assert_eq!(run.result, tally.0, "{kind} round {round}");
        }
    }
}

#[test]
fn select_top_k_fixed_examples() {
    use scrutineer::mpc::{run_simulated, MpcError, SessionParams};
    use scrutineer::protocol::select_top_k;

    // scores entered via per-tallier additive summands of a shared seed
    let cases: [(&[u64], usize, &[usize]); 3] = [
        (&[2, 1, 0], 1, &[0]),
        (&[3, 3, 1], 1, &[0]), // strict comparison keeps the incumbent
        (&[1, 4, 4, 2], 2, &[1, 2]),
    ];
    for (scores, k, expected) in cases {
        let params = SessionParams::new(PrimeModulus::MERSENNE_13, 3, 200);
        let runs = run_simulated::<_, MpcError, _>(&params, |engine| {
            let modulus = engine.modulus();
            let me = engine.me() as u64;
            // parties 1 and 2 contribute fixed noise, party 3 the residual
            let summands: Vec<_> = scores
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let noise = modulus.elem(1000 + i as u64) + modulus.elem(2000 + i as u64);
                    match me {
                        1 => modulus.elem(1000 + i as u64),
                        2 => modulus.elem(2000 + i as u64),
                        _ => modulus.elem(s) - noise,
                    }
                })
                .collect();
            let shares = engine.input_additive(&summands)?;
            select_top_k(engine, &shares, k)
        })
        .unwrap();
        for run in runs {
            assert_eq!(run.result, expected, "scores {scores:?}");
        }
    }
}

#[test]
fn over_capacity_electorate_is_refused() {
    let cfg = config(
        RuleKind::Plurality,
        2,
        3,
        1,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let ballots = vec![
        ballot("a", vec![1, 0, 0]),
        ballot("b", vec![1, 0, 0]),
        ballot("c", vec![0, 1, 0]),
    ];
    let result = run_election(
        &cfg,
        &ballots,
        &RunOptions {
            mode: Mode::Simulate,
            seed: 16,
        },
    );
    assert!(matches!(
        result,
        Err(ElectionError::TooManyVoters { got: 3, max: 2 })
    ));
}

#[test]
fn hostile_voter_tags_are_refused_at_submission() {
    use scrutineer::protocol::{build_share_frame, SubmissionServer};
    let cfg = config(
        RuleKind::Plurality,
        5,
        3,
        1,
        None,
        3,
        PrimeModulus::MERSENNE_13,
    );
    let mut server = SubmissionServer::new(1, [9u8; 32], [4u8; 16], &cfg);
    let entries: Vec<_> = [1u64, 0, 0].iter().map(|&v| cfg.modulus.elem(v)).collect();
    // a newline in the tag could forge an extra entry in the line-oriented
    // reconciliation exchange; a semicolon corrupts ballot files
    for tag in ["evil\nghost", "a;b", "nul\0nul"] {
        let body = build_share_frame(&[9u8; 32], [4u8; 16], 1, tag, 1, &entries, cfg.modulus);
        assert!(
            server.handle(&body).is_none(),
            "tag {tag:?} must be refused"
        );
    }
    assert_eq!(server.accepted_count(), 0);
    // a normal tag still goes through
    let body = build_share_frame(
        &[9u8; 32],
        [4u8; 16],
        1,
        "fine-tag",
        1,
        &entries,
        cfg.modulus,
    );
    assert!(server.handle(&body).is_some());
}
