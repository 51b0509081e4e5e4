//! Decimal-string serde adapters for big integers.
//!
//! Every big integer on the wire or on disk is a JSON string holding its
//! base-10 representation, so no consumer is bound by a fixed integer width.

use num_bigint::{BigInt, BigUint};
use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub mod dec_int {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::parse_bytes(s.trim().as_bytes(), 10)
            .ok_or_else(|| D::Error::custom(format!("invalid decimal integer {s:?}")))
    }
}

pub mod dec_uint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.trim().as_bytes(), 10)
            .ok_or_else(|| D::Error::custom(format!("invalid decimal integer {s:?}")))
    }
}

pub mod dec_uint_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_str_radix(10))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| {
                BigUint::parse_bytes(s.trim().as_bytes(), 10)
                    .ok_or_else(|| D::Error::custom(format!("invalid decimal integer {s:?}")))
            })
            .collect()
    }
}

pub fn parse_uint(s: &str) -> crate::Result<BigUint> {
    BigUint::parse_bytes(s.trim().as_bytes(), 10)
        .ok_or_else(|| crate::Error::Parse(format!("invalid unsigned integer {s:?}")))
}

pub fn parse_int(s: &str) -> crate::Result<BigInt> {
    BigInt::parse_bytes(s.trim().as_bytes(), 10)
        .ok_or_else(|| crate::Error::Parse(format!("invalid integer {s:?}")))
}
