//! Arithmetic in Z[i]/pZ[i] for a rational prime p ≡ 3 (mod 4).
//!
//! Canonical representatives live in the box `[0, p) × [0, p)`, so reduction
//! is component-wise integer reduction. The centered box `(−p/2, p/2)²` is
//! only reachable through [`GModRing::centered_lift`].

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::counters::OpCounts;
use crate::gaussian::GaussianInt;
use crate::primes::{is_suitable_prime, mod_inverse};
use crate::{Error, Result};

pub const DEFAULT_GENERATOR_ATTEMPTS: usize = 1000;

/// Modulus context for Z[i]*_p. The multiplicative group has order p² − 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GModRing {
    p: BigInt,
    order: BigInt,
}

impl GModRing {
    pub fn new(p: impl Into<BigInt>) -> Result<Self> {
        let p = p.into();
        if !is_suitable_prime(&p) {
            return Err(Error::Domain(format!("{p} is not a prime congruent to 3 mod 4")));
        }
        let order = (&p - 1) * (&p + 1);
        Ok(Self { p, order })
    }

    pub fn modulus(&self) -> &BigInt {
        &self.p
    }

    /// Order of the multiplicative group, p² − 1.
    pub fn group_order(&self) -> &BigInt {
        &self.order
    }

    pub fn group_order_unsigned(&self) -> BigUint {
        self.order.to_biguint().expect("order is positive")
    }

    pub fn reduce(&self, z: &GaussianInt) -> GaussianInt {
        GaussianInt {
            re: z.re.mod_floor(&self.p),
            im: z.im.mod_floor(&self.p),
        }
    }

    pub fn is_canonical(&self, z: &GaussianInt) -> bool {
        let in_range = |c: &BigInt| !c.is_negative() && c < &self.p;
        in_range(&z.re) && in_range(&z.im)
    }

    pub fn is_zero_mod(&self, z: &GaussianInt) -> bool {
        self.reduce(z).is_zero()
    }

    /// Maps a canonical representative to the congruent value with both
    /// components in `(−p/2, p/2)`.
    pub fn centered_lift(&self, z: &GaussianInt) -> Result<GaussianInt> {
        if !self.is_canonical(z) {
            return Err(Error::Domain(format!("{z} is not a canonical representative mod {}", self.p)));
        }
        let lift = |c: &BigInt| {
            if c * 2 > self.p {
                c - &self.p
            } else {
                c.clone()
            }
        };
        Ok(GaussianInt {
            re: lift(&z.re),
            im: lift(&z.im),
        })
    }

    pub fn mul(&self, x: &GaussianInt, y: &GaussianInt) -> GaussianInt {
        self.reduce(&(&self.reduce(x) * &self.reduce(y)))
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, x: &GaussianInt, e: &BigUint) -> GaussianInt {
        let mut base = self.reduce(x);
        let mut acc = GaussianInt::one();
        for i in 0..e.bits() {
            if e.bit(i) {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
        }
        self.reduce(&acc)
    }

    /// `conj(z) · N(z)⁻¹ mod p`.
    ///
    /// The integer inverse uses the extended Euclidean algorithm, but is
    /// recorded as one integer modular exponentiation in `counts` to match
    /// the protocol cost model.
    pub fn inv(&self, z: &GaussianInt, counts: &mut OpCounts) -> Result<GaussianInt> {
        let z = self.reduce(z);
        let p = self.p.to_biguint().expect("modulus is positive");
        let n = self.reduce_int(&z.norm());
        counts.int_modexp += 1;
        let n_inv = mod_inverse(&n, &p)
            .ok_or_else(|| Error::NotInvertible(z.to_string(), self.p.to_string()))?;
        let conj = z.conj();
        Ok(self.reduce(&GaussianInt {
            re: &conj.re * BigInt::from(n_inv.clone()),
            im: &conj.im * BigInt::from(n_inv),
        }))
    }

    fn reduce_int(&self, x: &BigInt) -> BigUint {
        x.mod_floor(&self.p).to_biguint().expect("reduced value is nonnegative")
    }

    /// `true` iff `z` has order exactly p² − 1, given the distinct prime
    /// factors of p² − 1.
    pub fn is_generator(&self, z: &GaussianInt, order_factors: &[BigUint]) -> bool {
        if self.is_zero_mod(z) {
            return false;
        }
        let order = self.group_order_unsigned();
        let one = GaussianInt::one();
        order_factors
            .iter()
            .all(|q| self.pow(z, &(&order / q)) != one)
    }

    /// Checks that `order_factors` are exactly the distinct primes of p² − 1.
    pub fn check_order_factors(&self, order_factors: &[BigUint]) -> Result<()> {
        let mut rest = self.group_order_unsigned();
        for q in order_factors {
            if q <= &BigUint::one() || !(&rest % q).is_zero() || !crate::primes::is_probable_prime(q) {
                return Err(Error::InvalidKey(format!(
                    "{q} is not a prime factor of p^2 - 1 = {}",
                    self.order
                )));
            }
            while (&rest % q).is_zero() {
                rest /= q;
            }
        }
        if !rest.is_one() {
            return Err(Error::InvalidKey(format!(
                "factorization of p^2 - 1 is incomplete, cofactor {rest} remains"
            )));
        }
        Ok(())
    }

    /// Random search for a generator of Z[i]*_p.
    pub fn find_generator<R: Rng + ?Sized>(
        &self,
        order_factors: &[BigUint],
        rng: &mut R,
        max_attempts: usize,
    ) -> Result<GaussianInt> {
        self.check_order_factors(order_factors)?;
        for _ in 0..max_attempts {
            let z = GaussianInt {
                re: rng.gen_bigint_range(&BigInt::zero(), &self.p),
                im: rng.gen_bigint_range(&BigInt::zero(), &self.p),
            };
            if self.is_generator(&z, order_factors) {
                return Ok(z);
            }
        }
        Err(Error::GeneratorSearchExhausted(max_attempts))
    }

    /// All p² canonical representatives, zero included. Only sensible for
    /// toy moduli.
    pub fn elements(&self) -> impl Iterator<Item = GaussianInt> + '_ {
        let p = &self.p;
        num_iter(p).flat_map(move |re| num_iter(p).map(move |im| GaussianInt { re: re.clone(), im }))
    }
}

fn num_iter(p: &BigInt) -> impl Iterator<Item = BigInt> + '_ {
    std::iter::successors(Some(BigInt::zero()), move |c| {
        let next = c + 1;
        (&next < p).then_some(next)
    })
}
