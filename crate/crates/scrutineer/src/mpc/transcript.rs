//! Per-tallier session transcript: rounds, reveals, disclosures and a
//! running digest of everything sent, exportable as line-oriented text.

use super::{CircuitStats, DisclosureKind, MaskKind};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub enum TranscriptEvent {
    /// One blocking exchange: what kind, how many payload bytes went out.
    Round {
        round: u64,
        kind: &'static str,
        bytes_sent: u64,
    },
    /// Masked internal reveal (not a disclosure).
    MaskedReveal {
        round: u64,
        kind: MaskKind,
        count: usize,
    },
    /// Intentional disclosure of public values.
    Disclosure {
        round: u64,
        kind: DisclosureKind,
        values: Vec<u64>,
    },
    /// Free-form phase marker from the protocol layer.
    Note { round: u64, text: String },
}

#[derive(Debug)]
pub struct Transcript {
    party: u16,
    events: Vec<TranscriptEvent>,
    digest: Sha256,
}

impl Transcript {
    pub fn new(party: u16) -> Self {
        Transcript {
            party,
            events: Vec::new(),
            digest: Sha256::new(),
        }
    }

    pub fn record(&mut self, event: TranscriptEvent) {
        self.events.push(event);
    }

    /// Folds sent payload bytes into the running digest.
    pub fn absorb_sent(&mut self, payload: &[u8]) {
        self.digest.update(payload);
    }

    pub fn events(&self) -> &[TranscriptEvent] {
        &self.events
    }

    /// All intentional disclosures, in order.
    pub fn disclosures(&self) -> impl Iterator<Item = (DisclosureKind, &[u64])> {
        self.events.iter().filter_map(|e| match e {
            TranscriptEvent::Disclosure { kind, values, .. } => Some((*kind, values.as_slice())),
            _ => None,
        })
    }

    /// Line-oriented text export. Contains no wall-clock timing, so two
    /// equal-seed simulate runs export byte-identical text.
    pub fn export_text(&self, stats: &CircuitStats) -> String {
        let mut out = String::new();
        out.push_str(&format!("tallier {}\n", self.party));
        for event in &self.events {
            match event {
                TranscriptEvent::Round {
                    round,
                    kind,
                    bytes_sent,
                } => {
                    out.push_str(&format!("round {round} kind={kind} sent={bytes_sent}B\n"));
                }
                TranscriptEvent::MaskedReveal { round, kind, count } => {
                    out.push_str(&format!(
                        "reveal round={round} kind={} count={count}\n",
                        kind.label()
                    ));
                }
                TranscriptEvent::Disclosure {
                    round,
                    kind,
                    values,
                } => {
                    let rendered: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                    out.push_str(&format!(
                        "open round={round} kind={} values=[{}]\n",
                        kind.label(),
                        rendered.join(",")
                    ));
                }
                TranscriptEvent::Note { round, text } => {
                    out.push_str(&format!("note round={round} {text}\n"));
                }
            }
        }
        out.push_str(&format!(
            "stats gates={} rounds={} mult_rounds={} bytes={}\n",
            stats.mult_gates, stats.rounds, stats.mult_rounds, stats.bytes_sent
        ));
        let digest = self.digest.clone().finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        out.push_str(&format!("sent-digest {hex}\n"));
        out
    }
}
