//! Paillier encryption and its component-wise extension to Gaussian integers.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codec;
use crate::counters::OpCounts;
use crate::gaussian::GaussianInt;
use crate::primes::{is_probable_prime, mod_inverse, random_prime};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaillierPublicKey {
    #[serde(with = "codec::dec_uint")]
    pub n: BigUint,
    #[serde(with = "codec::dec_uint")]
    pub g: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaillierPrivateKey {
    #[serde(rename = "L_P", with = "codec::dec_uint")]
    pub l_p: BigUint,
    #[serde(rename = "M_P", with = "codec::dec_uint")]
    pub m_p: BigUint,
}

/// A Gaussian integer encrypted as two independent Paillier ciphertexts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GPaillierCiphertext {
    #[serde(rename = "cR", with = "codec::dec_uint")]
    pub c_r: BigUint,
    #[serde(rename = "cI", with = "codec::dec_uint")]
    pub c_i: BigUint,
}

/// `L(x) = (x − 1)/n`, failing unless the division is exact.
fn l_function(x: &BigUint, n: &BigUint) -> Result<BigUint> {
    if x.is_zero() {
        return Err(Error::MalformedCiphertext("L(0) is undefined".into()));
    }
    let (q, r) = (x - 1u32).div_rem(n);
    if !r.is_zero() {
        return Err(Error::MalformedCiphertext("L(x) is not an integer".into()));
    }
    Ok(q)
}

/// Builds a key pair from two distinct primes with `gcd(pq, (p−1)(q−1)) = 1`
/// and `g = n + 1`.
pub fn keygen_from_primes(p: &BigUint, q: &BigUint) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    if p == q {
        return Err(Error::InvalidKey("p and q must differ".into()));
    }
    if !is_probable_prime(p) || !is_probable_prime(q) {
        return Err(Error::InvalidKey("p and q must be prime".into()));
    }
    let n = p * q;
    let p1 = p - 1u32;
    let q1 = q - 1u32;
    if !n.gcd(&(&p1 * &q1)).is_one() {
        return Err(Error::InvalidKey(format!("gcd(pq, (p-1)(q-1)) != 1 for p={p}, q={q}")));
    }
    let g = &n + 1u32;
    keygen_with_generator(n, g, p1.lcm(&q1))
}

fn keygen_with_generator(
    n: BigUint,
    g: BigUint,
    l_p: BigUint,
) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    let n2 = &n * &n;
    let u = g.modpow(&l_p, &n2);
    let l = l_function(&u, &n).map_err(|_| Error::InvalidKey("g is not a valid generator".into()))?;
    let m_p = mod_inverse(&l, &n).ok_or_else(|| Error::InvalidKey("L(g^L_P) is not invertible mod n".into()))?;
    Ok((PaillierPublicKey { n, g }, PaillierPrivateKey { l_p, m_p }))
}

/// Random key pair with an `bits`-bit modulus (two `bits/2`-bit primes).
pub fn keygen<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    if bits < 8 {
        return Err(Error::Domain("Paillier modulus needs at least 8 bits".into()));
    }
    loop {
        let p = random_prime(bits / 2, rng)?;
        let q = random_prime(bits - bits / 2, rng)?;
        if p == q || (&p * &q).bits() != bits {
            continue;
        }
        match keygen_from_primes(&p, &q) {
            Ok(keys) => return Ok(keys),
            Err(Error::InvalidKey(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

impl PaillierPublicKey {
    pub fn n_squared(&self) -> BigUint {
        &self.n * &self.n
    }

    /// Random `r` in `[1, n)` coprime with `n`.
    pub fn random_nonce<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        loop {
            let r = rng.gen_biguint_range(&BigUint::one(), &self.n);
            if r.gcd(&self.n).is_one() {
                return r;
            }
        }
    }

    /// `g^m · r^n mod n²`. Records two exponentiations mod n².
    pub fn encrypt(&self, m: &BigUint, r: &BigUint, counts: &mut OpCounts) -> Result<BigUint> {
        if m >= &self.n {
            return Err(Error::Range(format!("plaintext {m} is not below n = {}", self.n)));
        }
        if r.is_zero() || r >= &self.n || !r.gcd(&self.n).is_one() {
            return Err(Error::Domain("nonce must be a unit in [1, n)".into()));
        }
        let n2 = self.n_squared();
        let gm = self.g.modpow(m, &n2);
        let rn = r.modpow(&self.n, &n2);
        counts.modexp_n2 += 2;
        Ok(gm * rn % n2)
    }

    pub fn encrypt_random<R: Rng + ?Sized>(&self, m: &BigUint, rng: &mut R, counts: &mut OpCounts) -> Result<BigUint> {
        let r = self.random_nonce(rng);
        self.encrypt(m, &r, counts)
    }

    /// Homomorphic addition: the product mod n² decrypts to `m₁ + m₂ mod n`.
    pub fn add(&self, c1: &BigUint, c2: &BigUint) -> BigUint {
        c1 * c2 % self.n_squared()
    }

    /// Homomorphic scaling: `c^k mod n²` decrypts to `k·m mod n`.
    pub fn scale(&self, c: &BigUint, k: &BigUint) -> BigUint {
        c.modpow(k, &self.n_squared())
    }

    /// Maps a signed value with `|x| < n/2` into `[0, n)`.
    pub fn encode_signed(&self, x: &BigInt) -> Result<BigUint> {
        let n = BigInt::from(self.n.clone());
        if x.abs() * 2 >= n {
            return Err(Error::Range(format!("|{x}| is not below n/2")));
        }
        Ok(x.mod_floor(&n).to_biguint().expect("reduced value is nonnegative"))
    }

    /// Centered lift of a plaintext in `[0, n)`.
    pub fn decode_signed(&self, m: &BigUint) -> Result<BigInt> {
        if m >= &self.n {
            return Err(Error::Range(format!("{m} is not below n")));
        }
        let m_int = BigInt::from(m.clone());
        if m * 2u32 > self.n {
            Ok(m_int - BigInt::from(self.n.clone()))
        } else {
            Ok(m_int)
        }
    }

    /// Encrypts both components with explicit nonces. Records four
    /// exponentiations mod n².
    pub fn encrypt_gauss_with(
        &self,
        mu: &GaussianInt,
        r_re: &BigUint,
        r_im: &BigUint,
        counts: &mut OpCounts,
    ) -> Result<GPaillierCiphertext> {
        let m_r = self.encode_signed(&mu.re)?;
        let m_i = self.encode_signed(&mu.im)?;
        Ok(GPaillierCiphertext {
            c_r: self.encrypt(&m_r, r_re, counts)?,
            c_i: self.encrypt(&m_i, r_im, counts)?,
        })
    }

    pub fn encrypt_gauss<R: Rng + ?Sized>(
        &self,
        mu: &GaussianInt,
        rng: &mut R,
        counts: &mut OpCounts,
    ) -> Result<GPaillierCiphertext> {
        let r_re = self.random_nonce(rng);
        let r_im = self.random_nonce(rng);
        self.encrypt_gauss_with(mu, &r_re, &r_im, counts)
    }

    pub fn add_gauss(&self, c1: &GPaillierCiphertext, c2: &GPaillierCiphertext) -> GPaillierCiphertext {
        GPaillierCiphertext {
            c_r: self.add(&c1.c_r, &c2.c_r),
            c_i: self.add(&c1.c_i, &c2.c_i),
        }
    }
}

impl PaillierPrivateKey {
    /// `L(c^L_P mod n²)·M_P mod n`. Records one exponentiation mod n².
    pub fn decrypt(&self, c: &BigUint, public: &PaillierPublicKey, counts: &mut OpCounts) -> Result<BigUint> {
        let n2 = public.n_squared();
        if c.is_zero() || c >= &n2 || !c.gcd(&public.n).is_one() {
            return Err(Error::MalformedCiphertext("ciphertext is not a unit mod n^2".into()));
        }
        let u = c.modpow(&self.l_p, &n2);
        counts.modexp_n2 += 1;
        Ok(l_function(&u, &public.n)? * &self.m_p % &public.n)
    }

    /// Decrypts and decodes both components. Records two exponentiations mod n².
    pub fn decrypt_gauss(
        &self,
        ct: &GPaillierCiphertext,
        public: &PaillierPublicKey,
        counts: &mut OpCounts,
    ) -> Result<GaussianInt> {
        let m_r = self.decrypt(&ct.c_r, public, counts)?;
        let m_i = self.decrypt(&ct.c_i, public, counts)?;
        Ok(GaussianInt {
            re: public.decode_signed(&m_r)?,
            im: public.decode_signed(&m_i)?,
        })
    }
}
