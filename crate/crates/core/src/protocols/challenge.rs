//! Per-round challenge factors and the capacity checks that keep the
//! watermarked products from wrapping around the plaintext modulus.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Signed};
use rand::Rng;

use crate::gaussian::GaussianInt;
use crate::rdh::WatermarkKey;
use crate::{Error, Result};

/// Default cap on each component of a random λ.
pub const DEFAULT_LAMBDA_MAX: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChallengeFactor {
    pub key: WatermarkKey,
    pub round: u64,
}

impl ChallengeFactor {
    pub fn lambda(&self) -> &GaussianInt {
        self.key.lambda()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LambdaPolicy {
    Fixed(GaussianInt),
    /// Components drawn uniformly from `±[1, max]`.
    Random { max_component: BigUint },
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        LambdaPolicy::Random {
            max_component: BigUint::from(DEFAULT_LAMBDA_MAX),
        }
    }
}

/// Largest `|a| + |b|` for which every `λ·(d + iw)` with `|d|, |w| ≤ magnitude`
/// keeps `summands · max|component| < modulus / 2`.
///
/// `|Re(λδ)| = |ad − bw| ≤ (|a| + |b|)·max(|d|, |w|)`, likewise for the
/// imaginary part, so `2·summands·(|a| + |b|)·magnitude < modulus` suffices.
pub fn max_lambda_l1(modulus: &BigInt, magnitude: &BigInt, summands: usize) -> BigInt {
    let per_unit = BigInt::from(2 * summands.max(1)) * magnitude.max(&BigInt::one());
    (modulus - 1) / per_unit
}

impl LambdaPolicy {
    pub fn draw<R: Rng + ?Sized>(&self, round: u64, max_l1: &BigInt, rng: &mut R) -> Result<ChallengeFactor> {
        let lambda = match self {
            LambdaPolicy::Fixed(l) => {
                let l1 = l.re.abs() + l.im.abs();
                if &l1 > max_l1 {
                    return Err(Error::Config(format!(
                        "challenge factor {l} exceeds the plaintext capacity (|a|+|b| must be <= {max_l1})"
                    )));
                }
                l.clone()
            }
            LambdaPolicy::Random { max_component } => {
                let cap = BigInt::from(max_component.clone()).min(max_l1 / 2);
                if cap < BigInt::one() {
                    return Err(Error::Config(
                        "plaintext modulus too small for any challenge factor at this data range".into(),
                    ));
                }
                let mut component = || {
                    let v = rng.gen_bigint_range(&BigInt::one(), &(&cap + 1));
                    if rng.gen::<bool>() {
                        -v
                    } else {
                        v
                    }
                };
                let re = component();
                let im = component();
                GaussianInt { re, im }
            }
        };
        Ok(ChallengeFactor {
            key: WatermarkKey::new(lambda).map_err(|e| Error::Config(e.to_string()))?,
            round,
        })
    }
}
