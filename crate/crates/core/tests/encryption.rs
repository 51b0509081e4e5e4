//! ElGamal over Z[i]*_p and Paillier: exhaustive checks on toy parameters,
//! randomized checks on realistic sizes.

use hidden_core::elgamal::{self, EGCiphertext};
use hidden_core::paillier::{self, PaillierPublicKey};
use hidden_core::primes::{distinct_prime_factors, generate_elgamal_modulus};
use hidden_core::{GModRing, GaussianInt, OpCounts};
use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn u(v: u64) -> BigUint {
    BigUint::from(v)
}

fn g(a: i64, b: i64) -> GaussianInt {
    GaussianInt::new(a, b)
}

#[test]
fn elgamal_worked_example() {
    let ring = GModRing::new(23).unwrap();
    let factors = distinct_prime_factors(&ring.group_order_unsigned()).unwrap();
    let (pk, sk) = elgamal::keygen_with_secret(&ring, &g(1, 2), &factors, u(7)).unwrap();
    assert_eq!(pk.k, g(6, 2));
    let mut c = OpCounts::default();
    let c1 = elgamal::encrypt(&g(5, 4), &u(5), &pk, &mut c).unwrap();
    let c2 = elgamal::encrypt(&g(3, 2), &u(7), &pk, &mut c).unwrap();
    assert_eq!(c1, EGCiphertext { psi1: g(18, 8), psi2: g(21, 11) });
    assert_eq!(c2, EGCiphertext { psi1: g(6, 2), psi2: g(21, 16) });
    let prod = elgamal::ct_mul(&c1, &c2, &ring);
    assert_eq!(prod, EGCiphertext { psi1: g(0, 15), psi2: g(12, 15) });
    let m = elgamal::decrypt(&prod, &sk, &ring, &mut c).unwrap();
    assert_eq!(m, g(7, 22));
    assert_eq!(m, ring.reduce(&(g(5, 4) * g(3, 2))));
}

#[test]
fn elgamal_exhaustive_p7() {
    let ring = GModRing::new(7).unwrap();
    let factors = distinct_prime_factors(&ring.group_order_unsigned()).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let gamma = ring.find_generator(&factors, &mut rng, 1000).unwrap();
    let units: Vec<_> = ring.elements().filter(|z| !z.is_zero()).collect();
    assert_eq!(units.len(), 48);
    for a in [1u64, 5, 47] {
        let (pk, sk) = elgamal::keygen_with_secret(&ring, &gamma, &factors, u(a)).unwrap();
        let mut c = OpCounts::default();
        let cts: Vec<_> = units
            .iter()
            .map(|m| elgamal::encrypt(m, &u(rng.gen_range(1..48)), &pk, &mut c).unwrap())
            .collect();
        for (m, ct) in units.iter().zip(&cts) {
            assert_eq!(&elgamal::decrypt(ct, &sk, &ring, &mut c).unwrap(), m);
        }
        for (i, m1) in units.iter().enumerate() {
            for (j, m2) in units.iter().enumerate() {
                let prod = elgamal::ct_mul(&cts[i], &cts[j], &ring);
                assert_eq!(elgamal::decrypt(&prod, &sk, &ring, &mut c).unwrap(), ring.mul(m1, m2));
            }
        }
    }
}

#[test]
fn elgamal_128_bit_random() {
    let mut rng = ChaCha20Rng::seed_from_u64(128);
    let m = generate_elgamal_modulus(128, &mut rng).unwrap();
    let ring = GModRing::new(BigInt::from(m.p.clone())).unwrap();
    let gamma = ring.find_generator(&m.order_factors, &mut rng, 1000).unwrap();
    let (pk, sk) = elgamal::keygen(&ring, &gamma, &m.order_factors, &mut rng).unwrap();
    pk.validate_pair(&sk).unwrap();
    let p = BigInt::from(m.p);
    let half = &p / 2;
    for _ in 0..100 {
        let x = g(rng.gen_range(-1_000_000..1_000_000), rng.gen_range(1..1_000_000));
        let y = g(rng.gen_range(-1_000_000..1_000_000), rng.gen_range(1..1_000_000));
        let mut c = OpCounts::default();
        let cx = elgamal::encrypt_random(&ring.reduce(&x), &pk, &mut rng, &mut c).unwrap();
        let cy = elgamal::encrypt_random(&ring.reduce(&y), &pk, &mut rng, &mut c).unwrap();
        let mu = elgamal::decrypt(&elgamal::ct_mul(&cx, &cy, &ring), &sk, &ring, &mut c).unwrap();
        let lifted = ring.centered_lift(&mu).unwrap();
        let exact = &x * &y;
        assert!(exact.max_abs_component() < half);
        assert_eq!(lifted, exact);
        assert_eq!(c, OpCounts { complex_modexp: 5, int_modexp: 1, modexp_n2: 0 });
    }
}

fn plain_add(pk: &PaillierPublicKey, a: &BigUint, b: &BigUint) -> BigUint {
    (a + b) % &pk.n
}

#[test]
fn paillier_exhaustive_n35() {
    let (pk, sk) = paillier::keygen_from_primes(&u(5), &u(7)).unwrap();
    assert_eq!(pk.n, u(35));
    let mut c = OpCounts::default();
    let units: Vec<BigUint> = (1..35u64).map(u).filter(|r| r.gcd(&pk.n).is_one()).collect();
    assert_eq!(units.len(), 24);
    let mut cts = Vec::new();
    for m in (0..35u64).map(u) {
        for r in &units {
            let ct = pk.encrypt(&m, r, &mut c).unwrap();
            assert_eq!(sk.decrypt(&ct, &pk, &mut c).unwrap(), m);
        }
        cts.push(pk.encrypt(&m, &units[(m.iter_u64_digits().next().unwrap_or(0) as usize) % 24], &mut c).unwrap());
    }
    for a in 0..35usize {
        for b in 0..35usize {
            let sum = pk.add(&cts[a], &cts[b]);
            assert_eq!(sk.decrypt(&sum, &pk, &mut c).unwrap(), plain_add(&pk, &u(a as u64), &u(b as u64)));
        }
        for k in 0..35u64 {
            let scaled = pk.scale(&cts[a], &u(k));
            assert_eq!(sk.decrypt(&scaled, &pk, &mut c).unwrap(), u(a as u64 * k % 35));
        }
    }
    // signed sums decode while the total magnitude stays below n/2
    for x in -17i64..=17 {
        for y in -17i64..=17 {
            if x.abs() + y.abs() >= 18 {
                continue;
            }
            let cx = pk.encrypt(&pk.encode_signed(&x.into()).unwrap(), &units[0], &mut c).unwrap();
            let cy = pk.encrypt(&pk.encode_signed(&y.into()).unwrap(), &units[1], &mut c).unwrap();
            let m = sk.decrypt(&pk.add(&cx, &cy), &pk, &mut c).unwrap();
            assert_eq!(pk.decode_signed(&m).unwrap(), BigInt::from(x + y));
        }
    }
}

#[test]
fn paillier_512_bit_random() {
    let mut rng = ChaCha20Rng::seed_from_u64(512);
    let (pk, sk) = paillier::keygen(512, &mut rng).unwrap();
    assert_eq!(pk.n.bits(), 512);
    let mut c = OpCounts::default();
    let quarter = &pk.n >> 2;
    for _ in 0..1000 {
        let a = rng.gen_biguint_below(&pk.n);
        let b = rng.gen_biguint_below(&pk.n);
        let k = rng.gen_biguint(64);
        let ca = pk.encrypt_random(&a, &mut rng, &mut c).unwrap();
        let cb = pk.encrypt_random(&b, &mut rng, &mut c).unwrap();
        assert_eq!(sk.decrypt(&ca, &pk, &mut c).unwrap(), a);
        assert_eq!(sk.decrypt(&pk.add(&ca, &cb), &pk, &mut c).unwrap(), plain_add(&pk, &a, &b));
        assert_eq!(sk.decrypt(&pk.scale(&ca, &k), &pk, &mut c).unwrap(), (&a * &k) % &pk.n);

        // signed values with |x| + |y| < n/2
        let x = BigInt::from(rng.gen_biguint_below(&quarter)) * if rng.gen::<bool>() { 1i32 } else { -1i32 };
        let y = BigInt::from(rng.gen_biguint_below(&quarter)) * if rng.gen::<bool>() { 1i32 } else { -1i32 };
        let z = GaussianInt::new(x.clone(), y.clone());
        let w = GaussianInt::new(y.clone(), x.clone());
        let cz = pk.encrypt_gauss(&z, &mut rng, &mut c).unwrap();
        let cw = pk.encrypt_gauss(&w, &mut rng, &mut c).unwrap();
        assert_eq!(sk.decrypt_gauss(&pk.add_gauss(&cz, &cw), &pk, &mut c).unwrap(), &z + &w);
    }
}

#[test]
fn gaussian_paillier_counts() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let (pk, sk) = paillier::keygen(256, &mut rng).unwrap();
    let mut enc = OpCounts::default();
    let ct = pk.encrypt_gauss(&g(-7, 9), &mut rng, &mut enc).unwrap();
    assert_eq!(enc.modexp_n2, 4);
    let mut dec = OpCounts::default();
    assert_eq!(sk.decrypt_gauss(&ct, &pk, &mut dec).unwrap(), g(-7, 9));
    assert_eq!(dec.modexp_n2, 2);
}
