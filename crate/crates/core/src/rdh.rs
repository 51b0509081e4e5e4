//! Reversible watermark embedding in the Gaussian integers.
//!
//! Data `d` and watermark `w` form `d + iw`, which is multiplied by a secret
//! Gaussian integer key. Extraction divides exactly; a nonzero remainder is
//! reported as an integrity error instead of being rounded away.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::gaussian::GaussianInt;
use crate::primes::primes_below;
use crate::{Error, Result};

/// Default bound on the participant count for [`recover_n_and_w`].
pub const DEFAULT_N_MAX: u64 = 100;

/// The challenge factor λ. Both components must be nonzero so that data and
/// watermark are mixed into both parts of the result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GaussianInt", into = "GaussianInt")]
pub struct WatermarkKey {
    lambda: GaussianInt,
}

impl WatermarkKey {
    pub fn new(lambda: GaussianInt) -> Result<Self> {
        if lambda.re.is_zero() || lambda.im.is_zero() {
            return Err(Error::Domain(format!(
                "watermark key {lambda} needs nonzero real and imaginary parts"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> &GaussianInt {
        &self.lambda
    }
}

impl TryFrom<GaussianInt> for WatermarkKey {
    type Error = Error;
    fn try_from(value: GaussianInt) -> Result<Self> {
        Self::new(value)
    }
}

impl From<WatermarkKey> for GaussianInt {
    fn from(k: WatermarkKey) -> Self {
        k.lambda
    }
}

/// `λ·(d + iw)`.
pub fn embed(d: &BigInt, w: &BigInt, key: &WatermarkKey) -> GaussianInt {
    key.lambda() * &GaussianInt::new(d.clone(), w.clone())
}

/// Inverse of [`embed`]: returns `(d, w)`.
pub fn extract(watermarked: &GaussianInt, key: &WatermarkKey) -> Result<(BigInt, BigInt)> {
    let delta = watermarked.exact_div(key.lambda())?;
    Ok((delta.re, delta.im))
}

/// Sum of watermarked values.
pub fn aggregate(values: &[GaussianInt]) -> Result<GaussianInt> {
    if values.is_empty() {
        return Err(Error::Domain("cannot aggregate an empty list".into()));
    }
    Ok(values.iter().cloned().sum())
}

/// Recovers `(S, w)` from `σ' = λ(S + iNw)`.
pub fn extract_aggregate(sigma: &GaussianInt, key: &WatermarkKey, n: u64) -> Result<(BigInt, BigInt)> {
    if n == 0 {
        return Err(Error::Domain("participant count must be positive".into()));
    }
    let (s, nw) = extract(sigma, key)?;
    let (w, rem) = nw.div_rem(&BigInt::from(n));
    if !rem.is_zero() {
        return Err(Error::Integrity(format!(
            "aggregated watermark part {nw} is not divisible by N = {n}"
        )));
    }
    Ok((s, w))
}

/// Splits `N·w` into `(N, w)` without knowing `N`, assuming `N ≤ n_max` and
/// that `w` has no prime factor below `n_max`: every prime power below
/// `n_max` that divides the input belongs to `N`.
pub fn recover_n_and_w(imag_part: &BigInt, n_max: u64) -> Result<(BigInt, BigInt)> {
    if !imag_part.is_positive() {
        return Err(Error::Domain(format!("{imag_part} is not a positive integer")));
    }
    if n_max > u64::from(u32::MAX) {
        return Err(Error::Domain("n_max is too large for trial division".into()));
    }
    let mut rest = imag_part.clone();
    let mut n = BigInt::one();
    for q in primes_below(n_max as u32) {
        let q = BigInt::from(q);
        while rest.is_multiple_of(&q) {
            rest /= &q;
            n *= &q;
        }
    }
    if n > BigInt::from(n_max) {
        return Err(Error::Ambiguous {
            recovered: n.to_string(),
            limit: n_max,
        });
    }
    Ok((n, rest))
}

/// Integer 2×2 embedding matrix, the vector form of multiplication by λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbedMatrix {
    m11: BigInt,
    m12: BigInt,
    m21: BigInt,
    m22: BigInt,
}

impl EmbedMatrix {
    pub fn new(
        m11: impl Into<BigInt>,
        m12: impl Into<BigInt>,
        m21: impl Into<BigInt>,
        m22: impl Into<BigInt>,
    ) -> Result<Self> {
        let m = Self {
            m11: m11.into(),
            m12: m12.into(),
            m21: m21.into(),
            m22: m22.into(),
        };
        if m.determinant().is_zero() {
            return Err(Error::Domain("embedding matrix is singular".into()));
        }
        Ok(m)
    }

    /// `[[a, −b], [b, a]]`, which acts like multiplication by `a + ib`.
    pub fn from_key(key: &WatermarkKey) -> Self {
        let l = key.lambda();
        Self {
            m11: l.re.clone(),
            m12: -&l.im,
            m21: l.im.clone(),
            m22: l.re.clone(),
        }
    }

    pub fn determinant(&self) -> BigInt {
        &self.m11 * &self.m22 - &self.m12 * &self.m21
    }

    /// True iff every entry is nonzero, so both outputs depend on both inputs.
    pub fn is_mixing(&self) -> bool {
        [&self.m11, &self.m12, &self.m21, &self.m22]
            .iter()
            .all(|m| !m.is_zero())
    }
}

pub fn matrix_embed(d: &BigInt, w: &BigInt, m: &EmbedMatrix) -> (BigInt, BigInt) {
    (&m.m11 * d + &m.m12 * w, &m.m21 * d + &m.m22 * w)
}

/// Inverts [`matrix_embed`] through the adjugate, requiring exact division
/// by the determinant.
pub fn matrix_extract(v1: &BigInt, v2: &BigInt, m: &EmbedMatrix) -> Result<(BigInt, BigInt)> {
    let det = m.determinant();
    let d_num = &m.m22 * v1 - &m.m12 * v2;
    let w_num = &m.m11 * v2 - &m.m21 * v1;
    let (d, rd) = d_num.div_rem(&det);
    let (w, rw) = w_num.div_rem(&det);
    if !rd.is_zero() || !rw.is_zero() {
        return Err(Error::Integrity(format!(
            "({v1}, {v2}) is not in the image lattice of the embedding matrix"
        )));
    }
    Ok((d, w))
}
