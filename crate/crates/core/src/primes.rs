//! Integer number theory: primality, factorization, inverses, prime generation.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

const TRIAL_LIMIT: u32 = 1 << 16;
const MILLER_RABIN_ROUNDS: usize = 64;
const RHO_ITERATION_BUDGET: u64 = 1 << 24;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < n {
            if sieve[i] {
                let mut j = i * i;
                while j < n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..n).filter(|&k| sieve[k]).map(|k| k as u32).collect()
    })
}

/// Primes below `limit` (limit <= 2^16).
pub fn primes_below(limit: u32) -> impl Iterator<Item = u32> {
    small_primes().iter().copied().take_while(move |&p| p < limit)
}

/// Trial division below 2^16, then Miller-Rabin with 64 bases drawn from an
/// RNG seeded by the candidate itself, so the answer is a pure function of `n`.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &p in small_primes() {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    // no factor below 2^16 and n < 2^32 means n is prime
    if n.bits() <= 32 {
        return true;
    }
    let seed: [u8; 32] = Sha256::digest(n.to_bytes_be()).into();
    let mut rng = ChaCha20Rng::from_seed(seed);
    miller_rabin(n, MILLER_RABIN_ROUNDS, &mut rng)
}

fn miller_rabin<R: Rng + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A rational prime that stays prime in Z[i]: prime and `p ≡ 3 (mod 4)`.
pub fn is_suitable_prime(p: &BigInt) -> bool {
    match p.to_biguint() {
        Some(u) => (&u % 4u32) == BigUint::from(3u32) && is_probable_prime(&u),
        None => false,
    }
}

/// Modular inverse by the extended Euclidean algorithm.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_zero() {
        return None;
    }
    let a = BigInt::from(a % m);
    let m_int = BigInt::from(m.clone());
    let egcd = a.extended_gcd(&m_int);
    if !egcd.gcd.is_one() {
        return None;
    }
    egcd.x.mod_floor(&m_int).to_biguint()
}

/// Complete factorization as sorted `(prime, exponent)` pairs.
///
/// Trial division below 2^16 followed by Pollard-Brent rho on the cofactor.
/// Fails when rho exceeds its iteration budget; that bounds the practical
/// reach to numbers whose second-largest prime factor is below ~2^48.
pub fn factorize(n: &BigUint) -> Result<Vec<(BigUint, u32)>> {
    if n.is_zero() {
        return Err(Error::Factorization("cannot factor zero".into()));
    }
    let mut found: Vec<BigUint> = Vec::new();
    let mut rest = n.clone();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            found.push(pb.clone());
        }
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m) {
            found.push(m);
            continue;
        }
        let d = pollard_brent(&m)?;
        stack.push(&m / &d);
        stack.push(d);
    }
    found.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for f in found {
        match out.last_mut() {
            Some((q, e)) if *q == f => *e += 1,
            _ => out.push((f, 1)),
        }
    }
    Ok(out)
}

/// Distinct prime factors of `n`, ascending.
pub fn distinct_prime_factors(n: &BigUint) -> Result<Vec<BigUint>> {
    Ok(factorize(n)?.into_iter().map(|(p, _)| p).collect())
}

/// Distinct primes of `p² − 1`, found by factoring `p − 1` and `p + 1`
/// separately; each half is much easier than the product.
pub fn group_order_factors(p: &BigUint) -> Result<Vec<BigUint>> {
    if p < &BigUint::from(3u32) {
        return Err(Error::Domain(format!("{p} is too small")));
    }
    let mut all = distinct_prime_factors(&(p - 1u32))?;
    all.extend(distinct_prime_factors(&(p + 1u32))?);
    all.sort();
    all.dedup();
    Ok(all)
}

fn pollard_brent(n: &BigUint) -> Result<BigUint> {
    if n.is_even() {
        return Ok(BigUint::from(2u32));
    }
    let one = BigUint::one();
    let mut spent = 0u64;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = one.clone();
        let mut g = one.clone();
        let mut x = y.clone();
        let mut ys = y.clone();
        let batch = 128u64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0u64;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..batch.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += batch;
            }
            r *= 2;
            spent += r;
            if spent > RHO_ITERATION_BUDGET {
                return Err(Error::Factorization(format!(
                    "Pollard rho exceeded its budget on a {}-bit cofactor",
                    n.bits()
                )));
            }
        }
        if g == *n {
            // batch overshot; step back one at a time
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if g != *n {
            return Ok(g);
        }
    }
    unreachable!()
}

/// Uniform random prime with exactly `bits` bits.
pub fn random_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<BigUint> {
    if bits < 2 {
        return Err(Error::Domain("primes need at least 2 bits".into()));
    }
    loop {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        if bits > 2 {
            c.set_bit(0, true);
        }
        if is_probable_prime(&c) {
            return Ok(c);
        }
    }
}

/// A suitable ElGamal modulus together with the distinct prime factors of
/// `p² − 1`.
#[derive(Debug, Clone)]
pub struct ModulusWithOrder {
    pub p: BigUint,
    pub order_factors: Vec<BigUint>,
}

/// Searches for `p = 4r − 1` with `r` prime, so `p ≡ 3 (mod 4)`, `p + 1 = 4r`
/// and `p − 1 = 2(2r − 1)`. The candidate is kept only when `2r − 1` splits
/// into primes below 2^16 times at most one large prime, which gives the full
/// factorization of `p² − 1` without a general-purpose factoring step.
pub fn generate_elgamal_modulus<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<ModulusWithOrder> {
    if bits < 8 {
        return Err(Error::Domain("ElGamal modulus needs at least 8 bits".into()));
    }
    let one = BigUint::one();
    loop {
        let mut r = rng.gen_biguint(bits - 2);
        r.set_bit(bits - 3, true);
        r.set_bit(0, true);
        if !is_probable_prime(&r) {
            continue;
        }
        let p: BigUint = (&r << 2u32) - &one;
        if p.bits() != bits || !is_probable_prime(&p) {
            continue;
        }
        let mut cof: BigUint = (&r << 1u32) - &one;
        let mut factors = vec![BigUint::from(2u32), r.clone()];
        for &q in small_primes() {
            let qb = BigUint::from(q);
            if (&cof % &qb).is_zero() {
                factors.push(qb.clone());
                while (&cof % &qb).is_zero() {
                    cof /= &qb;
                }
            }
        }
        if !cof.is_one() {
            if !is_probable_prime(&cof) {
                continue;
            }
            factors.push(cof);
        }
        factors.sort();
        factors.dedup();
        return Ok(ModulusWithOrder { p, order_factors: factors });
    }
}
