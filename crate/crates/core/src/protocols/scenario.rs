//! Scenario configuration files and the seed tree that drives every random
//! choice of a simulation.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::codec::parse_int;
use crate::gaussian::GaussianInt;
use crate::protocols::attack::AttackConfig;
use crate::protocols::challenge::LambdaPolicy;
use crate::protocols::channel::AES_GCM;
use crate::protocols::schedule::WatermarkSchedule;
use crate::protocols::tree::TreeShape;
use crate::{Error, Result};

/// An integer written either as a JSON number or a decimal string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decimal(pub BigInt);

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Unsigned(u64),
            Signed(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Unsigned(v) => Ok(Decimal(v.into())),
            Raw::Signed(v) => Ok(Decimal(v.into())),
            Raw::Text(s) => parse_int(&s).map(Decimal).map_err(D::Error::custom),
        }
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl Decimal {
    pub fn to_biguint(&self, what: &str) -> Result<BigUint> {
        self.0
            .to_biguint()
            .ok_or_else(|| Error::Config(format!("{what} must be nonnegative, got {}", self.0)))
    }
}

/// A Gaussian integer written as `"a+bi"` or as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianValue(pub GaussianInt);

impl<'de> Deserialize<'de> for GaussianValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Parts(GaussianInt),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map(GaussianValue).map_err(D::Error::custom),
            Raw::Parts(g) => Ok(GaussianValue(g)),
        }
    }
}

impl Serialize for GaussianValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Fixed(GaussianValue),
    Random { max: Decimal },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// One row per round, one value per sensor.
    Inline(Vec<Vec<i64>>),
    Uniform { min: i64, max: i64 },
}

fn one_sensor() -> usize {
    1
}

fn default_bits() -> u32 {
    16
}

fn one_round() -> u64 {
    1
}

fn default_cipher() -> String {
    AES_GCM.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub protocol: String,
    /// ElGamal modulus; `p_bits` generates one instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GaussianValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paillier_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paillier_primes: Option<[Decimal; 2]>,
    #[serde(rename = "N", default = "one_sensor")]
    pub sensors: usize,
    #[serde(rename = "B", default = "default_bits")]
    pub watermark_bits: u32,
    #[serde(rename = "M", default = "one_round")]
    pub rounds: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
    pub data: DataSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaSpec>,
    /// Pre-agreed watermarks instead of the seeded schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watermarks: Option<Vec<u64>>,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub tree: TreeShape,
    #[serde(default = "default_cipher")]
    pub cipher: String,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid scenario: {e}")))
    }

    /// Checks everything that does not depend on key material.
    pub fn validate(&self) -> Result<()> {
        if self.sensors == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        if !(1..=64).contains(&self.watermark_bits) {
            return Err(Error::Config(format!("B must be in 1..=64, got {}", self.watermark_bits)));
        }
        match &self.data {
            DataSource::Inline(rows) => {
                if (rows.len() as u64) < self.rounds {
                    return Err(Error::Config(format!(
                        "inline data has {} row(s) for M = {} rounds",
                        rows.len(),
                        self.rounds
                    )));
                }
                if let Some(bad) = rows.iter().position(|r| r.len() != self.sensors) {
                    return Err(Error::Config(format!(
                        "inline data row {} does not have N = {} values",
                        bad + 1,
                        self.sensors
                    )));
                }
            }
            DataSource::Uniform { min, max } => {
                if min > max {
                    return Err(Error::Config(format!("uniform range is empty: {min} > {max}")));
                }
            }
        }
        if let Some(w) = &self.watermarks {
            if (w.len() as u64) < self.rounds {
                return Err(Error::Config(format!("{} watermark(s) for M = {} rounds", w.len(), self.rounds)));
            }
        }
        self.attack.validate(&self.protocol, self.rounds, self.sensors)
    }

    /// Largest `|d|` any sensor may report.
    pub fn data_bound(&self) -> BigInt {
        match &self.data {
            DataSource::Inline(rows) => rows
                .iter()
                .flatten()
                .map(|v| BigInt::from(*v).abs())
                .max()
                .unwrap_or_default(),
            DataSource::Uniform { min, max } => BigInt::from(*min).abs().max(BigInt::from(*max).abs()),
        }
    }

    /// Readings for rounds `1..=M`, indexed `[round − 1][sensor]`.
    pub fn readings(&self, seeds: &SeedTree) -> Vec<Vec<BigInt>> {
        let m = self.rounds as usize;
        match &self.data {
            DataSource::Inline(rows) => rows[..m]
                .iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
            DataSource::Uniform { min, max } => {
                let mut rng = seeds.rng("data");
                (0..m)
                    .map(|_| (0..self.sensors).map(|_| BigInt::from(rng.gen_range(*min..=*max))).collect())
                    .collect()
            }
        }
    }

    pub fn schedule(&self, seeds: &SeedTree) -> Result<WatermarkSchedule> {
        match &self.watermarks {
            Some(values) => WatermarkSchedule::explicit(values.clone(), self.watermark_bits),
            None => WatermarkSchedule::prf(&seeds.secret("schedule"), self.watermark_bits, self.rounds),
        }
    }

    pub fn lambda_policy(&self) -> Result<LambdaPolicy> {
        Ok(match &self.lambda {
            None => LambdaPolicy::default(),
            Some(LambdaSpec::Fixed(g)) => LambdaPolicy::Fixed(g.0.clone()),
            Some(LambdaSpec::Random { max }) => LambdaPolicy::Random {
                max_component: max.to_biguint("lambda max")?,
            },
        })
    }
}

/// Independent RNG streams derived from one seed string.
#[derive(Clone)]
pub struct SeedTree {
    master: Vec<u8>,
}

impl fmt::Debug for SeedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SeedTree(..)")
    }
}

impl SeedTree {
    pub fn new(seed: &str) -> Self {
        Self {
            master: seed.as_bytes().to_vec(),
        }
    }

    /// `SHA-256(seed || 0 || label)`.
    pub fn secret(&self, label: &str) -> [u8; 32] {
        Sha256::new()
            .chain_update(&self.master)
            .chain_update([0u8])
            .chain_update(label.as_bytes())
            .finalize()
            .into()
    }

    pub fn rng(&self, label: &str) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.secret(label))
    }

    pub fn sensor_rng(&self, index: usize) -> ChaCha20Rng {
        self.rng(&format!("sensor/{}", index + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::attack::TamperTarget;

    const THREE_SENSOR_STYLE: &str = r#"{
        "protocol": "aggp",
        "paillier_bits": 256,
        "N": 3, "B": 4, "M": 1,
        "seed": "demo",
        "data": {"inline": [[5, 8, 17]]},
        "lambda": "3+2i",
        "watermarks": [4]
    }"#;

    #[test]
    fn parses_a_full_config() {
        let c = ScenarioConfig::from_json(THREE_SENSOR_STYLE).unwrap();
        assert_eq!(c.sensors, 3);
        assert_eq!(c.lambda, Some(LambdaSpec::Fixed(GaussianValue(GaussianInt::new(3, 2)))));
        assert_eq!(c.cipher, AES_GCM);
        assert_eq!(c.tree, TreeShape::Padded);
        assert_eq!(c.attack, AttackConfig::None);
        assert_eq!(c.data_bound(), BigInt::from(17));
        c.validate().unwrap();
        let seeds = SeedTree::new("demo");
        assert_eq!(c.readings(&seeds), vec![vec![5.into(), 8.into(), 17.into()]]);
        assert_eq!(c.schedule(&seeds).unwrap().watermark_at(1).unwrap(), 4);
    }

    #[test]
    fn numbers_and_strings_both_accepted() {
        let c = ScenarioConfig::from_json(
            r#"{"protocol":"eg","p":"103","gamma":{"re":"1","im":"2"},"a":7,"data":{"uniform":{"min":-5,"max":5}},
                "lambda":{"max":"1000"},"attack":{"tamper":{"target":"response_psi2","round":1}}}"#,
        )
        .unwrap();
        assert_eq!(c.p, Some(Decimal(BigInt::from(103))));
        assert_eq!(c.a, Some(Decimal(BigInt::from(7))));
        assert_eq!(c.gamma.as_ref().unwrap().0, GaussianInt::new(1, 2));
        assert_eq!(
            c.attack,
            AttackConfig::Tamper {
                target: TamperTarget::ResponsePsi2,
                round: Some(1)
            }
        );
        assert_eq!(c.data_bound(), BigInt::from(5));
        assert_eq!(c.watermark_bits, 16);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ScenarioConfig::from_json(r#"{"protocol":"eg","data":{"uniform":{"min":0,"max":1}},"bogus":1}"#).is_err());
        let base = ScenarioConfig::from_json(THREE_SENSOR_STYLE).unwrap();
        let mut c = base.clone();
        c.rounds = 2;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.sensors = 2;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.watermark_bits = 0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.data = DataSource::Uniform { min: 3, max: 2 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn seed_tree_streams_are_independent_and_stable() {
        let a = SeedTree::new("x");
        assert_eq!(a.secret("dc"), SeedTree::new("x").secret("dc"));
        assert_ne!(a.secret("dc"), a.secret("keys"));
        assert_ne!(a.secret("dc"), SeedTree::new("y").secret("dc"));
        assert_ne!(a.sensor_rng(0).gen::<u64>(), a.sensor_rng(1).gen::<u64>());
    }

    #[test]
    fn uniform_readings_stay_in_range() {
        let mut c = ScenarioConfig::from_json(THREE_SENSOR_STYLE).unwrap();
        c.rounds = 5;
        c.watermarks = None;
        c.data = DataSource::Uniform { min: -3, max: 9 };
        let r = c.readings(&SeedTree::new("s"));
        assert_eq!(r.len(), 5);
        assert!(r.iter().flatten().all(|v| *v >= BigInt::from(-3) && *v <= BigInt::from(9)));
        assert_eq!(r, c.readings(&SeedTree::new("s")));
    }
}
