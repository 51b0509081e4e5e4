//! ElGamal encryption in the multiplicative group Z[i]*_p.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codec;
use crate::counters::OpCounts;
use crate::gaussian::GaussianInt;
use crate::modring::GModRing;
use crate::{Error, Result};

/// Public key `(p, γ, K = γ^a)` plus the distinct primes of `p² − 1`, which
/// let a loader re-validate the generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EGPublicKey {
    #[serde(with = "codec::dec_int")]
    pub p: BigInt,
    pub gamma: GaussianInt,
    #[serde(rename = "K")]
    pub k: GaussianInt,
    #[serde(with = "codec::dec_uint_vec")]
    pub order_factors: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EGPrivateKey {
    #[serde(with = "codec::dec_uint")]
    pub a: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EGCiphertext {
    pub psi1: GaussianInt,
    pub psi2: GaussianInt,
}

impl EGPublicKey {
    pub fn ring(&self) -> Result<GModRing> {
        GModRing::new(self.p.clone())
    }

    /// Bit length of the largest prime factor of the group order.
    pub fn largest_order_factor(&self) -> Option<&BigUint> {
        self.order_factors.iter().max()
    }

    /// Full consistency check: suitable modulus, complete factor list,
    /// generator of maximal order and canonical `K`.
    pub fn validate(&self) -> Result<GModRing> {
        let ring = self.ring().map_err(|e| Error::InvalidKey(e.to_string()))?;
        ring.check_order_factors(&self.order_factors)?;
        if !ring.is_canonical(&self.gamma) || !ring.is_generator(&self.gamma, &self.order_factors) {
            return Err(Error::InvalidKey(format!("{} is not a generator mod {}", self.gamma, self.p)));
        }
        if !ring.is_canonical(&self.k) || ring.is_zero_mod(&self.k) {
            return Err(Error::InvalidKey(format!("public element {} is not a unit", self.k)));
        }
        Ok(ring)
    }

    /// Recomputes `γ^a` and compares it with the stored `K`.
    pub fn validate_pair(&self, secret: &EGPrivateKey) -> Result<GModRing> {
        let ring = self.validate()?;
        check_exponent(&ring, &secret.a)?;
        if ring.pow(&self.gamma, &secret.a) != self.k {
            return Err(Error::InvalidKey("public key does not match private exponent".into()));
        }
        Ok(ring)
    }
}

fn check_exponent(ring: &GModRing, e: &BigUint) -> Result<()> {
    let order = ring.group_order_unsigned();
    if e.is_zero() || e >= &order {
        return Err(Error::Range(format!("exponent {e} outside [1, {}]", order - 1u32)));
    }
    Ok(())
}

/// Key generation with an explicit private exponent.
pub fn keygen_with_secret(
    ring: &GModRing,
    gamma: &GaussianInt,
    order_factors: &[BigUint],
    a: BigUint,
) -> Result<(EGPublicKey, EGPrivateKey)> {
    ring.check_order_factors(order_factors)?;
    let gamma = ring.reduce(gamma);
    if !ring.is_generator(&gamma, order_factors) {
        return Err(Error::InvalidKey(format!("{gamma} is not a generator mod {}", ring.modulus())));
    }
    check_exponent(ring, &a)?;
    let k = ring.pow(&gamma, &a);
    Ok((
        EGPublicKey {
            p: ring.modulus().clone(),
            gamma,
            k,
            order_factors: order_factors.to_vec(),
        },
        EGPrivateKey { a },
    ))
}

/// Key generation with `a` uniform in `[1, p² − 2]`.
pub fn keygen<R: Rng + ?Sized>(
    ring: &GModRing,
    gamma: &GaussianInt,
    order_factors: &[BigUint],
    rng: &mut R,
) -> Result<(EGPublicKey, EGPrivateKey)> {
    let a = random_exponent(ring, rng);
    keygen_with_secret(ring, gamma, order_factors, a)
}

pub fn random_exponent<R: Rng + ?Sized>(ring: &GModRing, rng: &mut R) -> BigUint {
    rng.gen_biguint_range(&BigUint::one(), &ring.group_order_unsigned())
}

/// `(γ^b, μ·K^b)`. Records two complex exponentiations.
pub fn encrypt(
    mu: &GaussianInt,
    b: &BigUint,
    public: &EGPublicKey,
    counts: &mut OpCounts,
) -> Result<EGCiphertext> {
    let ring = public.ring()?;
    if ring.is_zero_mod(mu) {
        return Err(Error::Domain(format!("{mu} is zero mod {} and cannot be encrypted", public.p)));
    }
    check_exponent(&ring, b)?;
    let psi1 = ring.pow(&public.gamma, b);
    let shared = ring.pow(&public.k, b);
    counts.complex_modexp += 2;
    Ok(EGCiphertext {
        psi1,
        psi2: ring.mul(mu, &shared),
    })
}

/// [`encrypt`] with a fresh ephemeral exponent.
pub fn encrypt_random<R: Rng + ?Sized>(
    mu: &GaussianInt,
    public: &EGPublicKey,
    rng: &mut R,
    counts: &mut OpCounts,
) -> Result<EGCiphertext> {
    let ring = public.ring()?;
    let b = random_exponent(&ring, rng);
    encrypt(mu, &b, public, counts)
}

/// `ψ₂·(ψ₁^a)⁻¹`. Records one complex exponentiation and one integer
/// exponentiation (the norm inversion).
pub fn decrypt(
    ct: &EGCiphertext,
    secret: &EGPrivateKey,
    ring: &GModRing,
    counts: &mut OpCounts,
) -> Result<GaussianInt> {
    if ring.is_zero_mod(&ct.psi1) || ring.is_zero_mod(&ct.psi2) {
        return Err(Error::MalformedCiphertext("ciphertext component is zero".into()));
    }
    let tau = ring.pow(&ct.psi1, &secret.a);
    counts.complex_modexp += 1;
    let tau_inv = ring
        .inv(&tau, counts)
        .map_err(|e| Error::MalformedCiphertext(e.to_string()))?;
    Ok(ring.mul(&ct.psi2, &tau_inv))
}

/// Component-wise product; decrypts to the product of the plaintexts.
pub fn ct_mul(c1: &EGCiphertext, c2: &EGCiphertext, ring: &GModRing) -> EGCiphertext {
    EGCiphertext {
        psi1: ring.mul(&c1.psi1, &c2.psi1),
        psi2: ring.mul(&c1.psi2, &c2.psi2),
    }
}
