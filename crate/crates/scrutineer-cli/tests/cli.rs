//! Black-box tests of the command-line interface.

use scrutineer::rules::{parse_ballots, rule_for, ElectionConfig, RuleKind};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scrutineer"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scrutineer-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const PLURALITY_CONFIG: &str = "\
rule = plurality
candidates = C00, C01, C02
voters = 3
winners = 1
talliers = 3
prime = p13
";

#[test]
fn run_three_ballot_plurality_fixture() {
    let dir = tempdir("run-plurality");
    let config = write(&dir, "election.conf", PLURALITY_CONFIG);
    let ballots = write(&dir, "ballots.txt", "v1;1,0,0\nv2;1,0,0\nv3;0,1,0\n");
    let report = dir.join("report.txt");
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--ballots")
        .arg(&ballots)
        .args(["--seed", "3", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("winner 1 index=0 name=C00"), "{text}");
    assert!(text.contains("voters accepted=3 rejected=0"), "{text}");
    // --out mirrors exactly what was printed
    assert_eq!(std::fs::read_to_string(&report).unwrap(), text);
}

#[test]
fn run_reports_rejection_with_reason() {
    let dir = tempdir("run-reject");
    let config = write(
        &dir,
        "election.conf",
        "rule = plurality\ncandidates = A, B, C\nvoters = 4\nwinners = 1\ntalliers = 3\nprime = p13\n",
    );
    let ballots = write(&dir, "ballots.txt", "v1;0,1,0\nv2;0,1,0\ncheat;4,0,0\n");
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--ballots")
        .arg(&ballots)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("voters accepted=2 rejected=1"), "{text}");
    assert!(
        text.contains("rejected voter=cheat reason=entry-out-of-range recovered=[4, 0, 0]"),
        "{text}"
    );
    assert!(text.contains("winner 1 index=1"), "{text}");
}

#[test]
fn run_rejects_undersized_modulus_with_exit_2() {
    let dir = tempdir("run-smallp");
    // borda with 40 voters and 12 candidates needs p > 480... but the
    // tighter comparison bound demands B < p/2; pick B just above it
    let config = write(
        &dir,
        "election.conf",
        "rule = borda\ncandidates = A,B,C,D,E,F,G,H,I,J,K,L\nvoters = 700\nwinners = 1\ntalliers = 3\nprime = p13\n",
    );
    let ballots = write(&dir, "ballots.txt", "v1;0,1,2,3,4,5,6,7,8,9,10,11\n");
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--ballots")
        .arg(&ballots)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("modulus too small for bound B"),
        "{}",
        stderr(&output)
    );
}

#[test]
fn run_bad_ballot_file_exits_2() {
    let dir = tempdir("run-badballots");
    let config = write(&dir, "election.conf", PLURALITY_CONFIG);
    let ballots = write(&dir, "ballots.txt", "not a ballot line\n");
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--ballots")
        .arg(&ballots)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn run_network_mode_small_election() {
    let dir = tempdir("run-network");
    let config = write(&dir, "election.conf", PLURALITY_CONFIG);
    let ballots = write(&dir, "ballots.txt", "v1;0,0,1\nv2;0,0,1\nv3;1,0,0\n");
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--ballots")
        .arg(&ballots)
        .args(["--mode", "network", "--seed", "9"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("winner 1 index=2 name=C02"));
}

#[test]
fn gen_is_seed_deterministic() {
    let dir = tempdir("gen-det");
    let out_a = dir.join("a.txt");
    let out_b = dir.join("b.txt");
    for out in [&out_a, &out_b] {
        let output = bin()
            .args([
                "gen",
                "--rule",
                "borda",
                "--voters",
                "30",
                "--candidates",
                "5",
                "--seed",
                "7",
                "--out",
            ])
            .arg(out)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "same seed, same file");
}

#[test]
fn gen_adversarial_fraction_is_exact_and_legal_ballots_are_legal() {
    let dir = tempdir("gen-adv");
    let out = dir.join("ballots.txt");
    let config_out = dir.join("election.conf");
    let output = bin()
        .args([
            "gen",
            "--rule",
            "approval",
            "--voters",
            "100",
            "--candidates",
            "6",
            "--winners",
            "2",
            "--seed",
            "11",
            "--adversarial-fraction",
            "0.1",
            "--out",
        ])
        .arg(&out)
        .arg("--config-out")
        .arg(&config_out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("100 ballots (10 adversarial)"));

    let config = ElectionConfig::from_file(&config_out).unwrap();
    let ballots = parse_ballots(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(ballots.len(), 100);
    let rule = rule_for(RuleKind::Approval);
    let illegal = ballots
        .iter()
        .filter(|b| !rule.is_legal(&config, &b.scores))
        .count();
    assert_eq!(illegal, 10, "exactly the adversarial fraction is illegal");
}

#[test]
fn gen_rejects_bad_parameters() {
    let output = bin()
        .args([
            "gen",
            "--rule",
            "range",
            "--voters",
            "10",
            "--candidates",
            "4",
            "--out",
            "/tmp/x",
        ])
        .output()
        .unwrap();
    // range needs --range-max
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bench_compare_emits_stable_csv_schema() {
    let dir = tempdir("bench");
    let out = dir.join("report.csv");
    let output = bin()
        .args([
            "bench",
            "--suite",
            "compare",
            "--talliers",
            "3",
            "--prime",
            "p13",
            "--reps",
            "1",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains(
        "operation,d,p,mode,seed,reps,wall_ms,rounds,mult_gates,bytes_per_tallier,reference_gates,gate_model"
    ));
    let row = csv
        .lines()
        .find(|l| l.starts_with("comparison,3,8191"))
        .expect("compare row present");
    assert!(row.contains(",4,91,"), "4 rounds and 91 gates: {row}");
    assert!(row.contains(",3632,differs-from-reference"), "{row}");
    assert!(row.contains(",simulate,5,"), "mode and seed tagged: {row}");
}

#[test]
fn bench_unknown_suite_exits_2() {
    let output = bin().args(["bench", "--suite", "nope"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bench_structural_columns_reproducible_and_rounds_field_invariant() {
    let dir = tempdir("bench-det");
    let out_a = dir.join("a.csv");
    let out_b = dir.join("b.csv");
    for out in [&out_a, &out_b] {
        let output = bin()
            .args([
                "bench",
                "--suite",
                "compare",
                "--talliers",
                "3,5",
                "--prime",
                "p13,p31",
                "--reps",
                "1",
                "--seed",
                "5",
                "--out",
            ])
            .arg(out)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    }
    let strip_wall = |csv: &str| -> Vec<String> {
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| {
                let cells: Vec<&str> = l.split(',').collect();
                // drop the wall_ms column (index 6)
                cells
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != 6)
                    .map(|(_, c)| *c)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    };
    let a = std::fs::read_to_string(&out_a).unwrap();
    let b = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(strip_wall(&a), strip_wall(&b), "only wall_ms may vary");

    // the rounds column is identical across both fields and tallier counts
    let rounds: Vec<&str> = a
        .lines()
        .filter(|l| l.starts_with("comparison,"))
        .map(|l| l.split(',').nth(7).unwrap())
        .collect();
    assert_eq!(rounds.len(), 4);
    assert!(rounds.iter().all(|&r| r == rounds[0]), "{rounds:?}");
}

#[test]
fn bench_verify_row_shows_batch_structure() {
    let dir = tempdir("bench-verify");
    let out = dir.join("report.csv");
    let output = bin()
        .args([
            "bench",
            "--suite",
            "verify",
            "--talliers",
            "3",
            "--prime",
            "p13",
            "--reps",
            "1",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let csv = std::fs::read_to_string(&out).unwrap();
    let row = csv
        .lines()
        .find(|l| l.starts_with("verify-batch-50000,3,8191"))
        .expect("verify row present");
    // 50000 entries cost exactly 50000 gates
    assert!(row.contains(",50000,"), "{row}");
}
