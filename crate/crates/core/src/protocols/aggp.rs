//! Multi-sensor watermarked aggregation under component-wise Paillier.
//!
//! Setup: each sensor sends its symmetric channel key to the data collector
//! under Paillier. Round `k`: the data collector seals `λ_k` to every
//! sensor; each sensor encrypts `λ_k(d_j + i·w_k)`; ciphertexts are summed
//! along a binary tree and the root goes to the data collector, which
//! decrypts `λ_k(S_k + i·N·w_k)` and extracts `(S_k, w_k)`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;
use rand_chacha::ChaCha20Rng;

use crate::counters::OpCounts;
use crate::gaussian::GaussianInt;
use crate::paillier::{self, GPaillierCiphertext, PaillierPrivateKey, PaillierPublicKey};
use crate::protocols::attack::{Adversary, PublicKeyView, PublicView, Wire};
use crate::protocols::challenge::{max_lambda_l1, LambdaPolicy};
use crate::protocols::channel::{CipherRegistry, SymmetricChannel, SymmetricCipher, SymmetricKey};
use crate::protocols::registry::Protocol;
use crate::protocols::scenario::{ScenarioConfig, SeedTree};
use crate::protocols::schedule::WatermarkSchedule;
use crate::protocols::transcript::{
    Message, MessageKind, Party, Payload, RejectReason, RoundLog, RoundTranscript, Simulation, Verdict,
};
use crate::protocols::tree::{tree_aggregate, Transfer, TreeHooks, TreeShape};
use crate::rdh;
use crate::{Error, Result};

pub const NAME: &str = "aggp";

pub struct AggpDataCollector {
    public: PaillierPublicKey,
    private: PaillierPrivateKey,
    schedule: WatermarkSchedule,
    lambda: LambdaPolicy,
    data_bound: BigInt,
    sensors: usize,
    cipher: Arc<dyn SymmetricCipher>,
    channels: Vec<Option<SymmetricChannel>>,
    rng: ChaCha20Rng,
}

impl AggpDataCollector {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        public: PaillierPublicKey,
        private: PaillierPrivateKey,
        schedule: WatermarkSchedule,
        lambda: LambdaPolicy,
        data_bound: BigInt,
        sensors: usize,
        cipher: Arc<dyn SymmetricCipher>,
        rng: ChaCha20Rng,
    ) -> Self {
        Self {
            public,
            private,
            schedule,
            lambda,
            data_bound,
            sensors,
            cipher,
            channels: vec![None; sensors],
            rng,
        }
    }

    pub fn public_key(&self) -> &PaillierPublicKey {
        &self.public
    }

    /// Decrypts and installs the channel key sent by sensor `index`.
    pub fn accept_key(&mut self, index: usize, payload: &Payload, counts: &mut OpCounts) -> Result<()> {
        let Payload::KeyChunks { chunks } = payload else {
            return Err(Error::Setup(format!("S{} sent no key material", index + 1)));
        };
        let plain = chunks
            .iter()
            .map(|c| self.private.decrypt(c, &self.public, counts))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Setup(format!("key from S{} does not decrypt: {e}", index + 1)))?;
        let key = SymmetricKey::from_chunks(&plain, &self.public.n)?;
        self.channels[index] = Some(SymmetricChannel::new(key, self.cipher.clone()));
        Ok(())
    }

    /// Draws `λ_k` and seals it to every sensor.
    pub fn challenges(&mut self, k: u64) -> Result<(GaussianInt, Vec<Message>)> {
        let w = self.schedule.watermark_at(k)?;
        let magnitude = self.data_bound.clone().max(BigInt::from(w));
        let n = BigInt::from(self.public.n.clone());
        let max_l1 = max_lambda_l1(&n, &magnitude, self.sensors);
        let factor = self.lambda.draw(k, &max_l1, &mut self.rng)?;
        let lambda = factor.lambda().clone();
        let messages = self
            .channels
            .iter()
            .enumerate()
            .map(|(j, ch)| {
                let ch = ch
                    .as_ref()
                    .ok_or_else(|| Error::Setup(format!("no channel to S{}", j + 1)))?;
                Ok(Message {
                    round: k,
                    from: Party::Dc,
                    to: Party::sensor(j),
                    kind: MessageKind::Challenge,
                    payload: Payload::Sealed(ch.seal_lambda(k, &lambda)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((lambda, messages))
    }

    pub fn verify(&mut self, k: u64, lambda: &GaussianInt, payload: &Payload, counts: &mut OpCounts) -> Result<Verdict> {
        let w = self.schedule.watermark_at(k)?;
        let reject = |reason| Ok(Verdict::Rejected { reason });
        let Payload::Paillier(ct) = payload else {
            return reject(RejectReason::MalformedCiphertext);
        };
        let Ok(sigma) = self.private.decrypt_gauss(ct, &self.public, counts) else {
            return reject(RejectReason::MalformedCiphertext);
        };
        let key = rdh::WatermarkKey::new(lambda.clone())?;
        let Ok((s, got_w)) = rdh::extract_aggregate(&sigma, &key, self.sensors as u64) else {
            return reject(RejectReason::DivisibilityFailure);
        };
        if got_w != BigInt::from(w) {
            return reject(RejectReason::WatermarkMismatch);
        }
        Ok(Verdict::Accepted { data: s, watermark: w })
    }
}

pub struct AggpSensor {
    index: usize,
    public: PaillierPublicKey,
    schedule: WatermarkSchedule,
    data_bound: BigInt,
    cipher: Arc<dyn SymmetricCipher>,
    channel: Option<SymmetricChannel>,
    rng: ChaCha20Rng,
}

impl AggpSensor {
    pub fn new(
        index: usize,
        public: PaillierPublicKey,
        schedule: WatermarkSchedule,
        data_bound: BigInt,
        cipher: Arc<dyn SymmetricCipher>,
        rng: ChaCha20Rng,
    ) -> Self {
        Self {
            index,
            public,
            schedule,
            data_bound,
            cipher,
            channel: None,
            rng,
        }
    }

    pub fn party(&self) -> Party {
        Party::sensor(self.index)
    }

    /// Generates the channel key and encrypts it for the data collector.
    pub fn key_exchange(&mut self, counts: &mut OpCounts) -> Result<Message> {
        let key = SymmetricKey::random(&mut self.rng);
        let chunks = key
            .to_chunks(&self.public.n)?
            .iter()
            .map(|c| self.public.encrypt_random(c, &mut self.rng, counts))
            .collect::<Result<Vec<_>>>()?;
        self.channel = Some(SymmetricChannel::new(key, self.cipher.clone()));
        Ok(Message {
            round: 0,
            from: self.party(),
            to: Party::Dc,
            kind: MessageKind::KeyExchange,
            payload: Payload::KeyChunks { chunks },
        })
    }

    pub fn channel(&self) -> Option<&SymmetricChannel> {
        self.channel.as_ref()
    }

    /// Opens the challenge and encrypts `λ_k(d + i·w_k)`; `None` when the
    /// challenge fails authentication.
    pub fn contribute(
        &mut self,
        k: u64,
        d: &BigInt,
        challenge: &Payload,
        counts: &mut OpCounts,
    ) -> Result<Option<GPaillierCiphertext>> {
        if d.abs() > self.data_bound {
            return Err(Error::Config(format!(
                "reading {d} outside the configured range ±{}",
                self.data_bound
            )));
        }
        let channel = self
            .channel
            .as_ref()
            .ok_or_else(|| Error::Setup(format!("S{} has no channel", self.index + 1)))?;
        let Payload::Sealed(sealed) = challenge else {
            return Ok(None);
        };
        let Ok(lambda) = channel.open_lambda(k, sealed) else {
            return Ok(None);
        };
        let Ok(key) = rdh::WatermarkKey::new(lambda) else {
            return Ok(None);
        };
        let w = BigInt::from(self.schedule.watermark_at(k)?);
        let mu = rdh::embed(d, &w, &key);
        self.public.encrypt_gauss(&mu, &mut self.rng, counts).map(Some)
    }

    fn encrypt_zero(&mut self, counts: &mut OpCounts) -> Result<GPaillierCiphertext> {
        self.public.encrypt_gauss(&GaussianInt::zero(), &mut self.rng, counts)
    }
}

/// Key transport for every sensor. Returns the setup messages as delivered.
pub fn aggp_setup(
    dc: &mut AggpDataCollector,
    sensors: &mut [AggpSensor],
    adversary: &mut dyn Adversary,
    watermark_bits: u32,
) -> Result<Vec<Message>> {
    let public = dc.public.clone();
    let mut wire = Wire::new(
        adversary,
        PublicView {
            key: PublicKeyView::Paillier(&public),
            watermark_bits,
        },
    );
    let mut setup_counts = OpCounts::default();
    let mut log = Vec::with_capacity(sensors.len());
    for (j, s) in sensors.iter_mut().enumerate() {
        let msg = wire.deliver(s.key_exchange(&mut setup_counts)?);
        dc.accept_key(j, &msg.payload, &mut setup_counts)?;
        log.push(msg);
    }
    Ok(log)
}

struct RoundHooks<'w, 'a, 'l> {
    sensors: &'a mut [AggpSensor],
    wire: &'a mut Wire<'w>,
    log: &'l mut RoundLog,
    round: u64,
}

impl TreeHooks for RoundHooks<'_, '_, '_> {
    fn encrypt_zero(&mut self, owner: usize) -> Result<GPaillierCiphertext> {
        self.sensors[owner].encrypt_zero(self.log.padding_counts())
    }

    fn transfer(&mut self, t: &Transfer) -> Result<GPaillierCiphertext> {
        let msg = self.wire.deliver(Message {
            round: self.round,
            from: Party::sensor(t.from),
            to: Party::sensor(t.to),
            kind: MessageKind::PartialSum,
            payload: Payload::Paillier(t.ciphertext.clone()),
        });
        let payload = msg.payload.clone();
        self.log.record(msg);
        match payload {
            Payload::Paillier(ct) => Ok(ct),
            _ => Err(Error::MalformedCiphertext("partial sum is not a Paillier ciphertext".into())),
        }
    }
}

/// One aggregation round. `data[j]` is the reading of sensor `j`.
pub fn aggp_round(
    dc: &mut AggpDataCollector,
    sensors: &mut [AggpSensor],
    data: &[BigInt],
    k: u64,
    shape: TreeShape,
    adversary: &mut dyn Adversary,
) -> Result<RoundTranscript> {
    if data.len() != sensors.len() || sensors.len() != dc.sensors {
        return Err(Error::Config("one reading per sensor is required".into()));
    }
    let public = dc.public.clone();
    let mut wire = Wire::new(
        adversary,
        PublicView {
            key: PublicKeyView::Paillier(&public),
            watermark_bits: dc.schedule.bits(),
        },
    );
    let mut log = RoundLog::new(NAME, k, sensors.len());

    let (lambda, challenges) = dc.challenges(k)?;
    let mut leaves = Vec::with_capacity(sensors.len());
    for (j, msg) in challenges.into_iter().enumerate() {
        let msg = wire.deliver(msg);
        let payload = msg.payload.clone();
        log.record(msg);
        match sensors[j].contribute(k, &data[j], &payload, log.sensor_counts(j))? {
            Some(ct) => leaves.push(ct),
            None => {
                log.reject(RejectReason::SymmetricAuthFailure);
                return Ok(log.finish());
            }
        }
    }

    let mut hooks = RoundHooks {
        sensors,
        wire: &mut wire,
        log: &mut log,
        round: k,
    };
    let outcome = match tree_aggregate(leaves, &public, shape, &mut hooks) {
        Ok(o) => o,
        Err(Error::MalformedCiphertext(_)) => {
            log.reject(RejectReason::MalformedCiphertext);
            return Ok(log.finish());
        }
        Err(e) => return Err(e),
    };

    let root = wire.deliver(Message {
        round: k,
        from: Party::sensor(outcome.root_owner),
        to: Party::Dc,
        kind: MessageKind::Aggregate,
        payload: Payload::Paillier(outcome.root),
    });
    let payload = root.payload.clone();
    log.record(root);
    let verdict = dc.verify(k, &lambda, &payload, log.dc_counts())?;
    log.set_verdict(verdict);
    Ok(log.finish())
}

pub fn scenario_keys(config: &ScenarioConfig, rng: &mut ChaCha20Rng) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    match (&config.paillier_primes, config.paillier_bits) {
        (Some([p, q]), _) => paillier::keygen_from_primes(&p.to_biguint("p")?, &q.to_biguint("q")?)
            .map_err(|e| Error::Config(e.to_string())),
        (None, Some(bits)) => paillier::keygen(bits, rng),
        (None, None) => Err(Error::Config("protocol aggp needs paillier_bits or paillier_primes".into())),
    }
}

/// Data collector and sensors for a scenario, before key transport.
pub fn scenario_parties(config: &ScenarioConfig, seeds: &SeedTree) -> Result<(AggpDataCollector, Vec<AggpSensor>)> {
    let (public, private) = scenario_keys(config, &mut seeds.rng("keys"))?;
    let schedule = config.schedule(seeds)?;
    let bound = config.data_bound();
    let cipher = CipherRegistry::default().get(&config.cipher)?;
    let dc = AggpDataCollector::new(
        public.clone(),
        private,
        schedule.clone(),
        config.lambda_policy()?,
        bound.clone(),
        config.sensors,
        cipher.clone(),
        seeds.rng("dc"),
    );
    let sensors = (0..config.sensors)
        .map(|j| {
            AggpSensor::new(
                j,
                public.clone(),
                schedule.clone(),
                bound.clone(),
                cipher.clone(),
                seeds.sensor_rng(j),
            )
        })
        .collect();
    Ok((dc, sensors))
}

pub struct AggpProtocol;

impl Protocol for AggpProtocol {
    fn name(&self) -> &'static str {
        NAME
    }

    fn description(&self) -> &'static str {
        "N sensors, component-wise Paillier, challenge factor sent over symmetric channels, tree aggregation"
    }

    fn simulate(&self, config: &ScenarioConfig, seeds: &SeedTree) -> Result<Simulation> {
        config.validate()?;
        let (mut dc, mut sensors) = scenario_parties(config, seeds)?;
        let mut adversary = config.attack.build(seeds.rng("adversary"));
        let setup = aggp_setup(&mut dc, &mut sensors, adversary.as_mut(), config.watermark_bits)?;
        let readings = config.readings(seeds);
        let rounds = (1..=config.rounds)
            .map(|k| {
                aggp_round(
                    &mut dc,
                    &mut sensors,
                    &readings[(k - 1) as usize],
                    k,
                    config.tree,
                    adversary.as_mut(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Simulation {
            protocol: NAME.into(),
            setup,
            rounds,
        })
    }
}
