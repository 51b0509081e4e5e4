//! Wire messages, per-round accounting and verdicts, and their JSON Lines
//! form.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use crate::codec;
use crate::counters::OpCounts;
use crate::elgamal::EGCiphertext;
use crate::paillier::GPaillierCiphertext;
use crate::protocols::channel::SealedBox;
use crate::{Error, Result};

/// The data collector, or sensor `S{j}` with 1-based `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Dc,
    Sensor(usize),
}

impl Party {
    /// Sensor for a 0-based index.
    pub fn sensor(index: usize) -> Self {
        Party::Sensor(index + 1)
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Dc => f.write_str("DC"),
            Party::Sensor(j) => write!(f, "S{j}"),
        }
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "DC" {
            return Ok(Party::Dc);
        }
        s.strip_prefix('S')
            .and_then(|j| j.parse::<usize>().ok())
            .filter(|&j| j >= 1)
            .map(Party::Sensor)
            .ok_or_else(|| Error::Parse(format!("unknown party {s:?}")))
    }
}

impl Serialize for Party {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Party {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    KeyExchange,
    Challenge,
    Response,
    PartialSum,
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    ElGamal(EGCiphertext),
    Paillier(GPaillierCiphertext),
    Sealed(SealedBox),
    KeyChunks {
        #[serde(with = "codec::dec_uint_vec")]
        chunks: Vec<BigUint>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub round: u64,
    pub from: Party,
    pub to: Party,
    pub kind: MessageKind,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    WatermarkMismatch,
    DivisibilityFailure,
    SymmetricAuthFailure,
    MalformedCiphertext,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::WatermarkMismatch => "watermark mismatch",
            RejectReason::DivisibilityFailure => "divisibility failure",
            RejectReason::SymmetricAuthFailure => "symmetric authentication failure",
            RejectReason::MalformedCiphertext => "malformed ciphertext",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    /// `data` is the sensor reading (EG) or the sum of readings (AggP).
    Accepted {
        #[serde(with = "codec::dec_int")]
        data: BigInt,
        watermark: u64,
    },
    Rejected { reason: RejectReason },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accepted { data, watermark } => write!(f, "accepted({data}, {watermark})"),
            Verdict::Rejected { reason } => write!(f, "rejected({reason})"),
        }
    }
}

/// Operation and message totals for one round. Sensor figures are the
/// maximum over sensors; `per_sensor` keeps the individual tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounters {
    pub sensors: usize,
    pub complex_modexp_sensor: u64,
    pub complex_modexp_dc: u64,
    pub int_modexp_sensor: u64,
    pub int_modexp_dc: u64,
    pub modexp_n2_sensor: u64,
    pub modexp_n2_dc: u64,
    /// Exponentiations spent on encryptions of zero that pad the tree.
    pub modexp_n2_padding: u64,
    pub messages_total: u64,
    pub per_sensor: Vec<OpCounts>,
}

impl RoundCounters {
    pub fn dc(&self) -> OpCounts {
        OpCounts {
            complex_modexp: self.complex_modexp_dc,
            int_modexp: self.int_modexp_dc,
            modexp_n2: self.modexp_n2_dc,
        }
    }

    pub fn sensor_max(&self) -> OpCounts {
        OpCounts {
            complex_modexp: self.complex_modexp_sensor,
            int_modexp: self.int_modexp_sensor,
            modexp_n2: self.modexp_n2_sensor,
        }
    }
}

/// Closing record of a round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: u64,
    pub protocol: String,
    pub counters: RoundCounters,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTranscript {
    pub messages: Vec<Message>,
    pub summary: RoundSummary,
}

impl RoundTranscript {
    pub fn round(&self) -> u64 {
        self.summary.round
    }

    pub fn verdict(&self) -> &Verdict {
        &self.summary.verdict
    }

    pub fn counters(&self) -> &RoundCounters {
        &self.summary.counters
    }
}

/// Accumulates one round. Counters only grow, and the verdict can be set
/// once; [`RoundLog::finish`] refuses a round without one.
#[derive(Debug)]
pub struct RoundLog {
    round: u64,
    protocol: String,
    messages: Vec<Message>,
    dc: OpCounts,
    sensors: Vec<OpCounts>,
    padding: OpCounts,
    verdict: Option<Verdict>,
}

impl RoundLog {
    pub fn new(protocol: &str, round: u64, sensors: usize) -> Self {
        Self {
            round,
            protocol: protocol.to_string(),
            messages: Vec::new(),
            dc: OpCounts::default(),
            sensors: vec![OpCounts::default(); sensors],
            padding: OpCounts::default(),
            verdict: None,
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn record(&mut self, msg: Message) {
        self.messages.push(msg);
    }

    pub fn dc_counts(&mut self) -> &mut OpCounts {
        &mut self.dc
    }

    pub fn sensor_counts(&mut self, index: usize) -> &mut OpCounts {
        &mut self.sensors[index]
    }

    pub fn padding_counts(&mut self) -> &mut OpCounts {
        &mut self.padding
    }

    pub fn has_verdict(&self) -> bool {
        self.verdict.is_some()
    }

    pub fn set_verdict(&mut self, verdict: Verdict) {
        assert!(self.verdict.is_none(), "verdict for round {} set twice", self.round);
        self.verdict = Some(verdict);
    }

    pub fn reject(&mut self, reason: RejectReason) {
        self.set_verdict(Verdict::Rejected { reason });
    }

    pub fn finish(self) -> RoundTranscript {
        let verdict = self
            .verdict
            .unwrap_or_else(|| panic!("round {} finished without a verdict", self.round));
        let max = |f: fn(&OpCounts) -> u64| self.sensors.iter().map(f).max().unwrap_or(0);
        let counters = RoundCounters {
            sensors: self.sensors.len(),
            complex_modexp_sensor: max(|c| c.complex_modexp),
            complex_modexp_dc: self.dc.complex_modexp,
            int_modexp_sensor: max(|c| c.int_modexp),
            int_modexp_dc: self.dc.int_modexp,
            modexp_n2_sensor: max(|c| c.modexp_n2),
            modexp_n2_dc: self.dc.modexp_n2,
            modexp_n2_padding: self.padding.modexp_n2,
            messages_total: self.messages.len() as u64,
            per_sensor: self.sensors.clone(),
        };
        RoundTranscript {
            messages: self.messages,
            summary: RoundSummary {
                round: self.round,
                protocol: self.protocol,
                counters,
                verdict,
            },
        }
    }
}

/// A complete run: setup traffic followed by the rounds in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub protocol: String,
    pub setup: Vec<Message>,
    pub rounds: Vec<RoundTranscript>,
}

impl Simulation {
    pub fn all_accepted(&self) -> bool {
        self.rounds.iter().all(|r| r.verdict().is_accepted())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        for m in &self.setup {
            push(serde_json::to_string(m).expect("message serializes"));
        }
        for r in &self.rounds {
            for m in &r.messages {
                push(serde_json::to_string(m).expect("message serializes"));
            }
            push(serde_json::to_string(&r.summary).expect("summary serializes"));
        }
        out
    }
}

/// One parsed transcript line.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum TranscriptLine {
    Message(Message),
    Summary(RoundSummary),
}

/// Parses a JSON Lines transcript, skipping blank lines.
pub fn parse_jsonl(text: &str) -> Result<Vec<TranscriptLine>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("transcript line {}: {e}", i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianInt;

    #[test]
    fn party_names() {
        assert_eq!(Party::Dc.to_string(), "DC");
        assert_eq!(Party::sensor(0).to_string(), "S1");
        assert_eq!("S12".parse::<Party>().unwrap(), Party::Sensor(12));
        assert!("S0".parse::<Party>().is_err());
        assert!("dc".parse::<Party>().is_err());
    }

    #[test]
    fn message_json_shape() {
        let m = Message {
            round: 2,
            from: Party::Dc,
            to: Party::Sensor(1),
            kind: MessageKind::Challenge,
            payload: Payload::ElGamal(EGCiphertext {
                psi1: GaussianInt::new(6, 2),
                psi2: GaussianInt::new(21, 16),
            }),
        };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"round":2,"from":"DC","to":"S1","kind":"challenge","payload":{"psi1":{"re":"6","im":"2"},"psi2":{"re":"21","im":"16"}}}"#
        );
        assert_eq!(serde_json::from_str::<Message>(&s).unwrap(), m);
    }

    #[test]
    fn payload_variants_round_trip() {
        let payloads = [
            Payload::Paillier(GPaillierCiphertext {
                c_r: BigUint::from(5u32),
                c_i: BigUint::from(9u32),
            }),
            Payload::Sealed(SealedBox {
                nonce: vec![0, 1],
                ciphertext: vec![0xff],
            }),
            Payload::KeyChunks {
                chunks: vec![BigUint::from(3u32)],
            },
        ];
        for p in payloads {
            let s = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<Payload>(&s).unwrap(), p);
        }
    }

    #[test]
    fn verdict_json_shape() {
        let v = Verdict::Accepted {
            data: BigInt::from(30),
            watermark: 4,
        };
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"status":"accepted","data":"30","watermark":4}"#);
        let r = Verdict::Rejected {
            reason: RejectReason::WatermarkMismatch,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"status":"rejected","reason":"watermark_mismatch"}"#
        );
        assert_eq!(r.to_string(), "rejected(watermark mismatch)");
    }

    #[test]
    fn log_takes_maxima_and_counts_messages() {
        let mut log = RoundLog::new("aggp", 1, 2);
        log.sensor_counts(0).modexp_n2 += 4;
        log.sensor_counts(1).modexp_n2 += 3;
        log.dc_counts().modexp_n2 += 2;
        log.record(Message {
            round: 1,
            from: Party::Sensor(2),
            to: Party::Sensor(1),
            kind: MessageKind::PartialSum,
            payload: Payload::KeyChunks { chunks: vec![] },
        });
        log.reject(RejectReason::DivisibilityFailure);
        let t = log.finish();
        assert_eq!(t.counters().modexp_n2_sensor, 4);
        assert_eq!(t.counters().modexp_n2_dc, 2);
        assert_eq!(t.counters().messages_total, 1);
        assert_eq!(t.counters().per_sensor[1].modexp_n2, 3);
    }

    #[test]
    #[should_panic(expected = "set twice")]
    fn verdict_is_set_once() {
        let mut log = RoundLog::new("eg", 1, 1);
        log.reject(RejectReason::WatermarkMismatch);
        log.reject(RejectReason::WatermarkMismatch);
    }

    #[test]
    fn jsonl_parses_back() {
        let mut log = RoundLog::new("eg", 1, 1);
        log.set_verdict(Verdict::Accepted {
            data: BigInt::from(-5),
            watermark: 0,
        });
        let sim = Simulation {
            protocol: "eg".into(),
            setup: vec![],
            rounds: vec![log.finish()],
        };
        let lines = parse_jsonl(&sim.to_jsonl()).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(matches!(&lines[0], TranscriptLine::Summary(s) if s.verdict.is_accepted()));
        assert!(parse_jsonl("{not json").is_err());
    }
}
