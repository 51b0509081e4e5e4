//! Shared, time-dependent watermark schedule.

use hmac::{Hmac, Mac};
use sha2::Sha256;

use crate::{Error, Result};

type HmacSha256 = Hmac<Sha256>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Source {
    /// `HMAC-SHA256(seed, "watermark" || k)` truncated to `bits`.
    Prf(Vec<u8>),
    /// A pre-agreed list, `values[k − 1]` for round `k`.
    Explicit(Vec<u64>),
}

/// Watermarks `w_1 … w_M`, each in `[0, 2^bits − 1]`, known to the data
/// collector and every sensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatermarkSchedule {
    source: Source,
    bits: u32,
    rounds: u64,
}

fn check_bits(bits: u32) -> Result<()> {
    if bits == 0 || bits > 64 {
        return Err(Error::Config(format!("watermark width must be 1..=64 bits, got {bits}")));
    }
    Ok(())
}

impl WatermarkSchedule {
    pub fn prf(seed: &[u8], bits: u32, rounds: u64) -> Result<Self> {
        check_bits(bits)?;
        if rounds == 0 {
            return Err(Error::Config("schedule needs at least one round".into()));
        }
        Ok(Self {
            source: Source::Prf(seed.to_vec()),
            bits,
            rounds,
        })
    }

    pub fn explicit(values: Vec<u64>, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        if values.is_empty() {
            return Err(Error::Config("explicit schedule is empty".into()));
        }
        let max = max_for(bits);
        if let Some(v) = values.iter().find(|&&v| v > max) {
            return Err(Error::Config(format!("watermark {v} does not fit in {bits} bits")));
        }
        Ok(Self {
            rounds: values.len() as u64,
            source: Source::Explicit(values),
            bits,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn max_watermark(&self) -> u64 {
        max_for(self.bits)
    }

    /// Watermark for round `k` (1-based).
    pub fn watermark_at(&self, k: u64) -> Result<u64> {
        if k == 0 || k > self.rounds {
            return Err(Error::Config(format!("round {k} outside 1..={}", self.rounds)));
        }
        match &self.source {
            Source::Explicit(v) => Ok(v[(k - 1) as usize]),
            Source::Prf(seed) => {
                let mut mac = HmacSha256::new_from_slice(seed).expect("HMAC accepts any key length");
                mac.update(b"watermark");
                mac.update(&k.to_be_bytes());
                let tag = mac.finalize().into_bytes();
                let word = u64::from_be_bytes(tag[..8].try_into().expect("8 bytes"));
                Ok(word & self.max_watermark())
            }
        }
    }
}

fn max_for(bits: u32) -> u64 {
    if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}
