//! Single-sensor watermarking under ElGamal over Z[i]*_p.
//!
//! Round `k`: the data collector sends `Enc(λ_k)`; the sensor multiplies it
//! by `Enc(d_k + i·w_k)` and returns the product; the data collector
//! decrypts, lifts to the centered box, divides by `λ_k` and checks `w_k`.

use num_bigint::BigInt;
use num_traits::Signed;
use rand_chacha::ChaCha20Rng;

use crate::counters::OpCounts;
use crate::elgamal::{self, EGPrivateKey, EGPublicKey};
use crate::gaussian::GaussianInt;
use crate::modring::{GModRing, DEFAULT_GENERATOR_ATTEMPTS};
use crate::primes::{generate_elgamal_modulus, group_order_factors};
use crate::protocols::attack::{Adversary, PublicKeyView, PublicView, Wire};
use crate::protocols::challenge::{max_lambda_l1, ChallengeFactor, LambdaPolicy};
use crate::protocols::registry::Protocol;
use crate::protocols::scenario::{ScenarioConfig, SeedTree};
use crate::protocols::schedule::WatermarkSchedule;
use crate::protocols::transcript::{
    Message, MessageKind, Party, Payload, RejectReason, RoundLog, RoundTranscript, Simulation, Verdict,
};
use crate::rdh;
use crate::{Error, Result};

pub const NAME: &str = "eg";

/// Added to the reading in rounds whose watermark is zero, so the encrypted
/// value `d + i·w` is never zero.
pub fn zero_watermark_offset(data_bound: &BigInt) -> BigInt {
    data_bound + 1
}

/// Largest component magnitude of `δ_k` in a round with watermark `w`.
fn delta_magnitude(data_bound: &BigInt, w: u64) -> BigInt {
    if w == 0 {
        2 * data_bound + 1
    } else {
        data_bound.clone().max(BigInt::from(w))
    }
}

fn delta(d: &BigInt, w: u64, data_bound: &BigInt) -> GaussianInt {
    if w == 0 {
        GaussianInt::new(d + zero_watermark_offset(data_bound), 0)
    } else {
        GaussianInt::new(d.clone(), w)
    }
}

pub struct EgDataCollector {
    public: EGPublicKey,
    secret: EGPrivateKey,
    ring: GModRing,
    schedule: WatermarkSchedule,
    lambda: LambdaPolicy,
    data_bound: BigInt,
    rng: ChaCha20Rng,
    pending: Option<ChallengeFactor>,
}

impl EgDataCollector {
    pub fn new(
        public: EGPublicKey,
        secret: EGPrivateKey,
        schedule: WatermarkSchedule,
        lambda: LambdaPolicy,
        data_bound: BigInt,
        rng: ChaCha20Rng,
    ) -> Result<Self> {
        let ring = public.ring()?;
        Ok(Self {
            public,
            secret,
            ring,
            schedule,
            lambda,
            data_bound,
            rng,
            pending: None,
        })
    }

    pub fn public_key(&self) -> &EGPublicKey {
        &self.public
    }

    /// Draws `λ_k` within the wrap-around bound and encrypts it.
    pub fn challenge(&mut self, k: u64, counts: &mut OpCounts) -> Result<Message> {
        let w = self.schedule.watermark_at(k)?;
        let max_l1 = max_lambda_l1(self.ring.modulus(), &delta_magnitude(&self.data_bound, w), 1);
        let factor = self.lambda.draw(k, &max_l1, &mut self.rng)?;
        let ct = elgamal::encrypt_random(factor.lambda(), &self.public, &mut self.rng, counts)?;
        self.pending = Some(factor);
        Ok(Message {
            round: k,
            from: Party::Dc,
            to: Party::sensor(0),
            kind: MessageKind::Challenge,
            payload: Payload::ElGamal(ct),
        })
    }

    pub fn verify(&mut self, k: u64, payload: &Payload, counts: &mut OpCounts) -> Result<Verdict> {
        let factor = self
            .pending
            .take()
            .filter(|f| f.round == k)
            .ok_or_else(|| Error::Config(format!("no challenge outstanding for round {k}")))?;
        let w = self.schedule.watermark_at(k)?;
        let reject = |reason| Ok(Verdict::Rejected { reason });
        let Payload::ElGamal(ct) = payload else {
            return reject(RejectReason::MalformedCiphertext);
        };
        if !self.ring.is_canonical(&ct.psi1) || !self.ring.is_canonical(&ct.psi2) {
            return reject(RejectReason::MalformedCiphertext);
        }
        let Ok(mu) = elgamal::decrypt(ct, &self.secret, &self.ring, counts) else {
            return reject(RejectReason::MalformedCiphertext);
        };
        let lifted = self.ring.centered_lift(&mu)?;
        let Ok((d, got_w)) = rdh::extract(&lifted, &factor.key) else {
            return reject(RejectReason::DivisibilityFailure);
        };
        if got_w != BigInt::from(w) {
            return reject(RejectReason::WatermarkMismatch);
        }
        let data = if w == 0 {
            d - zero_watermark_offset(&self.data_bound)
        } else {
            d
        };
        Ok(Verdict::Accepted { data, watermark: w })
    }
}

pub struct EgSensor {
    public: EGPublicKey,
    ring: GModRing,
    schedule: WatermarkSchedule,
    data_bound: BigInt,
    rng: ChaCha20Rng,
}

impl EgSensor {
    pub fn new(public: EGPublicKey, schedule: WatermarkSchedule, data_bound: BigInt, rng: ChaCha20Rng) -> Result<Self> {
        let ring = public.ring()?;
        Ok(Self {
            public,
            ring,
            schedule,
            data_bound,
            rng,
        })
    }

    /// `Enc(λ_k) ⊗ Enc(d + i·w_k)`, or `None` when the challenge is not an
    /// ElGamal ciphertext.
    pub fn respond(&mut self, k: u64, d: &BigInt, challenge: &Payload, counts: &mut OpCounts) -> Result<Option<Message>> {
        if d.abs() > self.data_bound {
            return Err(Error::Config(format!(
                "reading {d} outside the configured range ±{}",
                self.data_bound
            )));
        }
        let w = self.schedule.watermark_at(k)?;
        if delta_magnitude(&self.data_bound, w) * 2 >= *self.ring.modulus() {
            return Err(Error::Config(format!(
                "p = {} is too small for readings up to {} and watermarks up to {}",
                self.ring.modulus(),
                self.data_bound,
                self.schedule.max_watermark()
            )));
        }
        let Payload::ElGamal(ch) = challenge else {
            return Ok(None);
        };
        let own = elgamal::encrypt_random(&delta(d, w, &self.data_bound), &self.public, &mut self.rng, counts)?;
        Ok(Some(Message {
            round: k,
            from: Party::sensor(0),
            to: Party::Dc,
            kind: MessageKind::Response,
            payload: Payload::ElGamal(elgamal::ct_mul(ch, &own, &self.ring)),
        }))
    }
}

/// One challenge/response round between the data collector and the sensor.
pub fn eg_round(
    dc: &mut EgDataCollector,
    sensor: &mut EgSensor,
    d: &BigInt,
    k: u64,
    adversary: &mut dyn Adversary,
) -> Result<RoundTranscript> {
    let public = dc.public.clone();
    let view = PublicView {
        key: PublicKeyView::ElGamal(&public),
        watermark_bits: dc.schedule.bits(),
    };
    let mut wire = Wire::new(adversary, view);
    let mut log = RoundLog::new(NAME, k, 1);

    let challenge = wire.deliver(dc.challenge(k, log.dc_counts())?);
    let payload = challenge.payload.clone();
    log.record(challenge);

    match sensor.respond(k, d, &payload, log.sensor_counts(0))? {
        None => log.reject(RejectReason::MalformedCiphertext),
        Some(response) => {
            let response = wire.deliver(response);
            let payload = response.payload.clone();
            log.record(response);
            let verdict = dc.verify(k, &payload, log.dc_counts())?;
            log.set_verdict(verdict);
        }
    }
    Ok(log.finish())
}

/// ElGamal key pair from the scenario: an explicit `p` (with optional `γ`
/// and `a`) or a generated `p_bits`-bit modulus.
pub fn scenario_keys(config: &ScenarioConfig, rng: &mut ChaCha20Rng) -> Result<(EGPublicKey, EGPrivateKey)> {
    let (p, factors) = match (&config.p, config.p_bits) {
        (Some(p), _) => {
            let p = p.0.clone();
            // validates p before the factoring step
            let ring = GModRing::new(p.clone()).map_err(|e| Error::Config(e.to_string()))?;
            let factors = group_order_factors(&ring.modulus().to_biguint().expect("suitable primes are positive"))?;
            (p, factors)
        }
        (None, Some(bits)) => {
            let m = generate_elgamal_modulus(bits, rng)?;
            (BigInt::from(m.p), m.order_factors)
        }
        (None, None) => return Err(Error::Config("protocol eg needs p or p_bits".into())),
    };
    let ring = GModRing::new(p)?;
    let gamma = match &config.gamma {
        Some(g) => g.0.clone(),
        None => ring.find_generator(&factors, rng, DEFAULT_GENERATOR_ATTEMPTS)?,
    };
    let a = match &config.a {
        Some(a) => a.to_biguint("a")?,
        None => elgamal::random_exponent(&ring, rng),
    };
    elgamal::keygen_with_secret(&ring, &gamma, &factors, a).map_err(|e| Error::Config(e.to_string()))
}

pub struct EgProtocol;

impl Protocol for EgProtocol {
    fn name(&self) -> &'static str {
        NAME
    }

    fn description(&self) -> &'static str {
        "one sensor, ElGamal over Z[i]*_p, challenge factor sent encrypted"
    }

    fn simulate(&self, config: &ScenarioConfig, seeds: &SeedTree) -> Result<Simulation> {
        config.validate()?;
        if config.sensors != 1 {
            return Err(Error::Config(format!("protocol eg runs with N = 1, got {}", config.sensors)));
        }
        let (public, secret) = scenario_keys(config, &mut seeds.rng("keys"))?;
        let schedule = config.schedule(seeds)?;
        let bound = config.data_bound();
        let mut dc = EgDataCollector::new(
            public.clone(),
            secret,
            schedule.clone(),
            config.lambda_policy()?,
            bound.clone(),
            seeds.rng("dc"),
        )?;
        let mut sensor = EgSensor::new(public, schedule, bound, seeds.sensor_rng(0))?;
        let mut adversary = config.attack.build(seeds.rng("adversary"));
        let readings = config.readings(seeds);
        let rounds = (1..=config.rounds)
            .map(|k| eg_round(&mut dc, &mut sensor, &readings[(k - 1) as usize][0], k, adversary.as_mut()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Simulation {
            protocol: NAME.into(),
            setup: Vec::new(),
            rounds,
        })
    }
}
