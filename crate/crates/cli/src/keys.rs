use hidden_core::elgamal;
use hidden_core::modring::DEFAULT_GENERATOR_ATTEMPTS;
use hidden_core::paillier;
use hidden_core::primes::{generate_elgamal_modulus, group_order_factors};
use hidden_core::protocols::SeedTree;
use hidden_core::{Error, GModRing, GaussianInt, Result};
use num_bigint::{BigInt, BigUint};

use crate::Scheme;

pub struct KeygenParams {
    pub bits: Option<u64>,
    pub p: Option<BigInt>,
    pub q: Option<BigInt>,
    pub gamma: Option<GaussianInt>,
    pub a: Option<BigInt>,
}

/// Serialized key pair plus an optional note for stderr.
pub struct KeyFiles {
    pub prefix: &'static str,
    pub public: String,
    pub private: String,
    pub report: Option<String>,
}

impl KeygenParams {
    /// Rejects missing modulus flags before any seed is drawn.
    pub fn check(&self, scheme: Scheme) -> Result<()> {
        match scheme {
            Scheme::Eg if self.p.is_none() && self.bits.is_none() => {
                Err(Error::Config("ElGamal keygen needs --p or --bits".into()))
            }
            Scheme::Paillier if self.bits.is_none() && (self.p.is_none() || self.q.is_none()) => {
                Err(Error::Config("Paillier keygen needs --p and --q, or --bits".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn needs_randomness(&self, scheme: Scheme) -> bool {
        match scheme {
            Scheme::Eg => self.p.is_none() || self.gamma.is_none() || self.a.is_none(),
            Scheme::Paillier => self.p.is_none() && self.q.is_none(),
        }
    }
}

fn unsigned(v: &BigInt, what: &str) -> Result<BigUint> {
    v.to_biguint()
        .ok_or_else(|| Error::Config(format!("{what} must be non-negative")))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("keys serialize")
}

pub fn eg(params: &KeygenParams, seeds: Option<&SeedTree>) -> Result<KeyFiles> {
    let mut rng = seeds.map(|s| s.rng("keygen"));
    let (p, factors) = match (&params.p, params.bits) {
        (Some(p), _) => {
            let factors = group_order_factors(&unsigned(p, "p")?)?;
            (p.clone(), factors)
        }
        (None, Some(bits)) => {
            let m = generate_elgamal_modulus(bits, rng.as_mut().expect("seeded"))?;
            (BigInt::from(m.p), m.order_factors)
        }
        (None, None) => return Err(Error::Config("ElGamal keygen needs --p or --bits".into())),
    };
    let ring = GModRing::new(p)?;
    let gamma = match &params.gamma {
        Some(g) => g.clone(),
        None => ring.find_generator(&factors, rng.as_mut().expect("seeded"), DEFAULT_GENERATOR_ATTEMPTS)?,
    };
    let a = match &params.a {
        Some(a) => unsigned(a, "a")?,
        None => elgamal::random_exponent(&ring, rng.as_mut().expect("seeded")),
    };
    let (public, private) = elgamal::keygen_with_secret(&ring, &gamma, &factors, a)?;
    let report = public.largest_order_factor().map(|f| {
        format!(
            "largest prime factor of p^2 - 1: {f} ({} bits; p has {} bits)",
            f.bits(),
            public.p.bits()
        )
    });
    Ok(KeyFiles {
        prefix: "eg",
        public: to_json(&public),
        private: to_json(&private),
        report,
    })
}

pub fn paillier(params: &KeygenParams, seeds: Option<&SeedTree>) -> Result<KeyFiles> {
    let (public, private) = match (&params.p, &params.q, params.bits) {
        (Some(p), Some(q), _) => paillier::keygen_from_primes(&unsigned(p, "p")?, &unsigned(q, "q")?)?,
        (None, None, Some(bits)) => paillier::keygen(bits, &mut seeds.expect("seeded").rng("keygen"))?,
        _ => return Err(Error::Config("Paillier keygen needs --p and --q, or --bits".into())),
    };
    Ok(KeyFiles {
        prefix: "paillier",
        public: to_json(&public),
        private: to_json(&private),
        report: None,
    })
}
