//! Man-in-the-middle adversaries that sit on the simulated wire.
//!
//! None of them hold the data collector's private key, the challenge
//! factors or the watermark schedule; they see public keys and traffic.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::counters::OpCounts;
use crate::elgamal::{self, EGCiphertext, EGPublicKey};
use crate::gaussian::GaussianInt;
use crate::paillier::PaillierPublicKey;
use crate::protocols::transcript::{Message, MessageKind, Party, Payload};
use crate::{Error, Result};

/// What an eavesdropper knows besides the traffic.
#[derive(Debug, Clone, Copy)]
pub enum PublicKeyView<'a> {
    ElGamal(&'a EGPublicKey),
    Paillier(&'a PaillierPublicKey),
}

#[derive(Debug, Clone, Copy)]
pub struct PublicView<'a> {
    pub key: PublicKeyView<'a>,
    pub watermark_bits: u32,
}

pub trait Adversary {
    fn name(&self) -> &'static str;
    /// Sees every message before delivery and may rewrite it in place.
    fn intercept(&mut self, msg: &mut Message, view: &PublicView<'_>);
}

/// Routes every message through an adversary.
pub struct Wire<'a> {
    adversary: &'a mut dyn Adversary,
    view: PublicView<'a>,
}

impl<'a> Wire<'a> {
    pub fn new(adversary: &'a mut dyn Adversary, view: PublicView<'a>) -> Self {
        Self { adversary, view }
    }

    /// Returns the message as the receiver gets it.
    pub fn deliver(&mut self, mut msg: Message) -> Message {
        self.adversary.intercept(&mut msg, &self.view);
        msg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TamperTarget {
    Challenge,
    ResponsePsi1,
    ResponsePsi2,
    KeyExchange,
    PartialSumRe,
    PartialSumIm,
    AggregateRe,
    AggregateIm,
}

impl TamperTarget {
    fn kind(self) -> MessageKind {
        match self {
            TamperTarget::Challenge => MessageKind::Challenge,
            TamperTarget::ResponsePsi1 | TamperTarget::ResponsePsi2 => MessageKind::Response,
            TamperTarget::KeyExchange => MessageKind::KeyExchange,
            TamperTarget::PartialSumRe | TamperTarget::PartialSumIm => MessageKind::PartialSum,
            TamperTarget::AggregateRe | TamperTarget::AggregateIm => MessageKind::Aggregate,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackConfig {
    #[default]
    None,
    /// Re-sends the round-`from` report to the data collector in round `at`.
    Replay { from: u64, at: u64 },
    /// Corrupts one component of the first matching message of each round,
    /// or only of `round` when given.
    Tamper {
        target: TamperTarget,
        #[serde(default)]
        round: Option<u64>,
    },
    /// Replaces the report with one carrying no watermark.
    Masquerade,
    /// Replaces the report with fabricated data and a guessed watermark.
    FalseInjection,
}

impl AttackConfig {
    /// Rejects combinations that cannot occur in a run of `protocol` with
    /// `rounds` rounds and `sensors` sensors.
    pub fn validate(&self, protocol: &str, rounds: u64, sensors: usize) -> Result<()> {
        let eg = protocol == "eg";
        match self {
            AttackConfig::Replay { from, at } => {
                if !(1 <= *from && from < at && *at <= rounds) {
                    return Err(Error::Config(format!(
                        "replay needs 1 <= from < at <= {rounds}, got from={from} at={at}"
                    )));
                }
            }
            AttackConfig::Tamper { target, round } => {
                let ok = match target {
                    TamperTarget::Challenge => true,
                    TamperTarget::ResponsePsi1 | TamperTarget::ResponsePsi2 => eg,
                    TamperTarget::KeyExchange | TamperTarget::AggregateRe | TamperTarget::AggregateIm => !eg,
                    TamperTarget::PartialSumRe | TamperTarget::PartialSumIm => !eg && sensors >= 2,
                };
                if !ok {
                    return Err(Error::Config(format!(
                        "tamper target {target:?} does not occur in protocol {protocol:?} with {sensors} sensor(s)"
                    )));
                }
                if let Some(r) = round {
                    if *r == 0 && *target != TamperTarget::KeyExchange || *r > rounds {
                        return Err(Error::Config(format!("tamper round {r} outside the run")));
                    }
                }
            }
            AttackConfig::None | AttackConfig::Masquerade | AttackConfig::FalseInjection => {}
        }
        Ok(())
    }

    pub fn build(&self, rng: ChaCha20Rng) -> Box<dyn Adversary> {
        match self {
            AttackConfig::None => Box::new(Passive),
            AttackConfig::Replay { from, at } => Box::new(Replay {
                from: *from,
                at: *at,
                recorded: None,
            }),
            AttackConfig::Tamper { target, round } => Box::new(Tamper {
                target: *target,
                round: *round,
                last_hit: None,
                rng,
            }),
            AttackConfig::Masquerade => Box::new(Forger {
                guess_watermark: false,
                challenge: None,
                rng,
            }),
            AttackConfig::FalseInjection => Box::new(Forger {
                guess_watermark: true,
                challenge: None,
                rng,
            }),
        }
    }
}

/// Honest network.
pub struct Passive;

impl Adversary for Passive {
    fn name(&self) -> &'static str {
        "none"
    }

    fn intercept(&mut self, _msg: &mut Message, _view: &PublicView<'_>) {}
}

fn is_report(msg: &Message) -> bool {
    msg.to == Party::Dc && matches!(msg.kind, MessageKind::Response | MessageKind::Aggregate)
}

pub struct Replay {
    from: u64,
    at: u64,
    recorded: Option<Payload>,
}

impl Adversary for Replay {
    fn name(&self) -> &'static str {
        "replay"
    }

    fn intercept(&mut self, msg: &mut Message, _view: &PublicView<'_>) {
        if !is_report(msg) {
            return;
        }
        if msg.round == self.from {
            self.recorded = Some(msg.payload.clone());
        } else if msg.round == self.at {
            if let Some(old) = &self.recorded {
                msg.payload = old.clone();
            }
        }
    }
}

pub struct Tamper {
    target: TamperTarget,
    round: Option<u64>,
    last_hit: Option<u64>,
    rng: ChaCha20Rng,
}

impl Adversary for Tamper {
    fn name(&self) -> &'static str {
        "tamper"
    }

    fn intercept(&mut self, msg: &mut Message, view: &PublicView<'_>) {
        if msg.kind != self.target.kind()
            || self.round.is_some_and(|r| r != msg.round)
            || self.last_hit == Some(msg.round)
        {
            return;
        }
        self.last_hit = Some(msg.round);
        let rng = &mut self.rng;
        match (&mut msg.payload, view.key) {
            (Payload::ElGamal(ct), PublicKeyView::ElGamal(pk)) => {
                let component = match self.target {
                    TamperTarget::ResponsePsi1 => &mut ct.psi1,
                    _ => &mut ct.psi2,
                };
                perturb_residue(component, &pk.p, rng);
            }
            (Payload::Paillier(ct), PublicKeyView::Paillier(pk)) => {
                let c = match self.target {
                    TamperTarget::PartialSumIm | TamperTarget::AggregateIm => &mut ct.c_i,
                    _ => &mut ct.c_r,
                };
                *c = &*c * random_unit(&pk.n_squared(), &pk.n, rng) % pk.n_squared();
            }
            (Payload::Sealed(sealed), _) => {
                flip_random_bit(&mut sealed.ciphertext, rng);
            }
            (Payload::KeyChunks { chunks }, _) => {
                if !chunks.is_empty() {
                    let i = rng.gen_range(0..chunks.len());
                    let mut bytes = chunks[i].to_bytes_le();
                    flip_random_bit(&mut bytes, rng);
                    chunks[i] = BigUint::from_bytes_le(&bytes);
                }
            }
            _ => {}
        }
    }
}

/// Changes one coordinate of a residue mod `p` by a random nonzero amount.
fn perturb_residue<R: Rng + ?Sized>(z: &mut GaussianInt, p: &BigInt, rng: &mut R) {
    let delta = rng.gen_bigint_range(&BigInt::one(), p);
    let coord = if rng.gen::<bool>() { &mut z.re } else { &mut z.im };
    *coord = (&*coord + delta).mod_floor(p);
}

fn random_unit<R: Rng + ?Sized>(modulus: &BigUint, n: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let r = rng.gen_biguint_range(&BigUint::from(2u32), modulus);
        if r.gcd(n).is_one() {
            return r;
        }
    }
}

fn flip_random_bit<R: RngCore + ?Sized>(bytes: &mut [u8], rng: &mut R) {
    if bytes.is_empty() {
        return;
    }
    let i = (rng.next_u32() as usize) % bytes.len();
    bytes[i] ^= 1 << (rng.next_u32() % 8);
}

/// Impersonates the reporting party. Under ElGamal it can still multiply
/// the intercepted challenge by a value of its choosing; under Paillier it
/// never learns λ and submits a fresh encryption.
pub struct Forger {
    guess_watermark: bool,
    challenge: Option<EGCiphertext>,
    rng: ChaCha20Rng,
}

impl Forger {
    fn fake_value(&mut self, bits: u32) -> GaussianInt {
        let d = self.rng.gen_range(1..=1000i64);
        let w = if self.guess_watermark {
            let max = if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 };
            self.rng.gen_range(0..=max)
        } else {
            0
        };
        GaussianInt::new(d, w)
    }
}

impl Adversary for Forger {
    fn name(&self) -> &'static str {
        if self.guess_watermark {
            "false_injection"
        } else {
            "masquerade"
        }
    }

    fn intercept(&mut self, msg: &mut Message, view: &PublicView<'_>) {
        if msg.kind == MessageKind::Challenge {
            if let Payload::ElGamal(ct) = &msg.payload {
                self.challenge = Some(ct.clone());
            }
            return;
        }
        if !is_report(msg) {
            return;
        }
        let fake = self.fake_value(view.watermark_bits);
        let mut scratch = OpCounts::default();
        match view.key {
            PublicKeyView::ElGamal(pk) => {
                let (Some(challenge), Ok(ring)) = (&self.challenge, pk.ring()) else {
                    return;
                };
                if let Ok(ct) = elgamal::encrypt_random(&fake, pk, &mut self.rng, &mut scratch) {
                    msg.payload = Payload::ElGamal(elgamal::ct_mul(challenge, &ct, &ring));
                }
            }
            PublicKeyView::Paillier(pk) => {
                if let Ok(ct) = pk.encrypt_gauss(&fake, &mut self.rng, &mut scratch) {
                    msg.payload = Payload::Paillier(ct);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn msg(round: u64, kind: MessageKind, to: Party, payload: Payload) -> Message {
        Message {
            round,
            from: Party::Sensor(1),
            to,
            kind,
            payload,
        }
    }

    fn eg_ct(a: i64) -> Payload {
        Payload::ElGamal(EGCiphertext {
            psi1: GaussianInt::new(a, 1),
            psi2: GaussianInt::new(a, 2),
        })
    }

    fn eg_view(pk: &EGPublicKey) -> PublicView<'_> {
        PublicView {
            key: PublicKeyView::ElGamal(pk),
            watermark_bits: 4,
        }
    }

    fn toy_key() -> EGPublicKey {
        EGPublicKey {
            p: BigInt::from(23),
            gamma: GaussianInt::new(1, 2),
            k: GaussianInt::new(6, 2),
            order_factors: vec![2u32.into(), 3u32.into(), 11u32.into()],
        }
    }

    #[test]
    fn config_json_forms() {
        let cases = [
            (r#""none""#, AttackConfig::None),
            (r#"{"replay":{"from":1,"at":2}}"#, AttackConfig::Replay { from: 1, at: 2 }),
            (
                r#"{"tamper":{"target":"response_psi2"}}"#,
                AttackConfig::Tamper {
                    target: TamperTarget::ResponsePsi2,
                    round: None,
                },
            ),
            (r#""masquerade""#, AttackConfig::Masquerade),
            (r#""false_injection""#, AttackConfig::FalseInjection),
        ];
        for (json, expected) in cases {
            assert_eq!(serde_json::from_str::<AttackConfig>(json).unwrap(), expected);
        }
    }

    #[test]
    fn validation() {
        assert!(AttackConfig::Replay { from: 1, at: 2 }.validate("eg", 2, 1).is_ok());
        assert!(AttackConfig::Replay { from: 2, at: 2 }.validate("eg", 2, 1).is_err());
        assert!(AttackConfig::Replay { from: 1, at: 3 }.validate("eg", 2, 1).is_err());
        let t = |target| AttackConfig::Tamper { target, round: None };
        assert!(t(TamperTarget::ResponsePsi1).validate("eg", 1, 1).is_ok());
        assert!(t(TamperTarget::ResponsePsi1).validate("aggp", 1, 3).is_err());
        assert!(t(TamperTarget::PartialSumRe).validate("aggp", 1, 1).is_err());
        assert!(t(TamperTarget::PartialSumRe).validate("aggp", 1, 2).is_ok());
        assert!(t(TamperTarget::KeyExchange).validate("eg", 1, 1).is_err());
    }

    #[test]
    fn replay_substitutes_recorded_report() {
        let pk = toy_key();
        let mut adv = AttackConfig::Replay { from: 1, at: 3 }.build(ChaCha20Rng::seed_from_u64(0));
        let mut wire = Wire::new(adv.as_mut(), eg_view(&pk));
        let first = wire.deliver(msg(1, MessageKind::Response, Party::Dc, eg_ct(5)));
        assert_eq!(first.payload, eg_ct(5));
        let second = wire.deliver(msg(2, MessageKind::Response, Party::Dc, eg_ct(6)));
        assert_eq!(second.payload, eg_ct(6));
        let third = wire.deliver(msg(3, MessageKind::Response, Party::Dc, eg_ct(7)));
        assert_eq!(third.payload, eg_ct(5));
        assert_eq!(third.round, 3);
    }

    #[test]
    fn tamper_changes_exactly_one_coordinate_once_per_round() {
        let pk = toy_key();
        let mut adv = AttackConfig::Tamper {
            target: TamperTarget::ResponsePsi2,
            round: None,
        }
        .build(ChaCha20Rng::seed_from_u64(1));
        let mut wire = Wire::new(adv.as_mut(), eg_view(&pk));
        for round in 1..=50 {
            let out = wire.deliver(msg(round, MessageKind::Response, Party::Dc, eg_ct(5)));
            let Payload::ElGamal(ct) = out.payload else { panic!() };
            assert_eq!(ct.psi1, GaussianInt::new(5, 1));
            let changed = (ct.psi2.re != BigInt::from(5)) as u8 + (ct.psi2.im != BigInt::from(2)) as u8;
            assert_eq!(changed, 1);
            let again = wire.deliver(msg(round, MessageKind::Response, Party::Dc, eg_ct(5)));
            assert_eq!(again.payload, eg_ct(5));
        }
        let untouched = wire.deliver(msg(1, MessageKind::Challenge, Party::Sensor(1), eg_ct(9)));
        assert_eq!(untouched.payload, eg_ct(9));
    }

    #[test]
    fn passive_wire_is_transparent() {
        let pk = toy_key();
        let mut adv = AttackConfig::None.build(ChaCha20Rng::seed_from_u64(0));
        assert_eq!(adv.name(), "none");
        let mut wire = Wire::new(adv.as_mut(), eg_view(&pk));
        let m = msg(1, MessageKind::Response, Party::Dc, eg_ct(3));
        assert_eq!(wire.deliver(m.clone()), m);
    }
}
