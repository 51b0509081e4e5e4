//! Authenticated symmetric channels from the data collector to each sensor,
//! and transport of the channel keys under Paillier.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes128Gcm, Nonce};
use hmac::{Hmac, Mac};
use num_bigint::BigUint;
use num_traits::Zero;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gaussian::GaussianInt;
use crate::{Error, Result};

pub const KEY_LEN: usize = 16;
pub const NONCE_LEN: usize = 12;
const TAG_LEN: usize = 16;

pub const AES_GCM: &str = "aes-128-gcm";
pub const KEYED_STREAM: &str = "sha256-stream";

#[derive(Clone, PartialEq, Eq)]
pub struct SymmetricKey([u8; KEY_LEN]);

impl SymmetricKey {
    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        Self(bytes)
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; KEY_LEN];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    pub fn as_bytes(&self) -> &[u8; KEY_LEN] {
        &self.0
    }

    /// Splits the key, read as a big-endian integer, into base-`n` digits
    /// (least significant first). The digit count depends only on `n`.
    pub fn to_chunks(&self, n: &BigUint) -> Result<Vec<BigUint>> {
        if n < &BigUint::from(2u32) {
            return Err(Error::Domain("chunk modulus must be at least 2".into()));
        }
        let mut value = BigUint::from_bytes_be(&self.0);
        let count = chunk_count(n);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(&value % n);
            value /= n;
        }
        debug_assert!(value.is_zero());
        Ok(out)
    }

    /// Inverse of [`SymmetricKey::to_chunks`].
    pub fn from_chunks(chunks: &[BigUint], n: &BigUint) -> Result<Self> {
        let mut value = BigUint::zero();
        for c in chunks.iter().rev() {
            if c >= n {
                return Err(Error::Setup("key chunk is not below n".into()));
            }
            value = value * n + c;
        }
        // only the low 128 bits are kept: a corrupted chunk yields a wrong
        // key, which surfaces as an authentication failure on first use
        let value = value % (BigUint::from(1u32) << (8 * KEY_LEN));
        let bytes = value.to_bytes_be();
        let mut k = [0u8; KEY_LEN];
        k[KEY_LEN - bytes.len()..].copy_from_slice(&bytes);
        Ok(Self(k))
    }
}

/// Number of base-`n` digits needed for any 128-bit value.
fn chunk_count(n: &BigUint) -> usize {
    let mut max = (BigUint::from(1u32) << (8 * KEY_LEN)) - 1u32;
    let mut count = 0;
    while !max.is_zero() {
        max /= n;
        count += 1;
    }
    count
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

/// Nonce for round `k`: the round index, big-endian, left-padded.
pub fn round_nonce(round: u64) -> [u8; NONCE_LEN] {
    let mut n = [0u8; NONCE_LEN];
    n[NONCE_LEN - 8..].copy_from_slice(&round.to_be_bytes());
    n
}

pub trait SymmetricCipher: Send + Sync {
    fn name(&self) -> &'static str;
    fn seal(&self, key: &SymmetricKey, nonce: &[u8; NONCE_LEN], plaintext: &[u8]) -> Vec<u8>;
    fn open(&self, key: &SymmetricKey, nonce: &[u8; NONCE_LEN], ciphertext: &[u8]) -> Result<Vec<u8>>;
}

pub struct AesGcmCipher;

impl SymmetricCipher for AesGcmCipher {
    fn name(&self) -> &'static str {
        AES_GCM
    }

    fn seal(&self, key: &SymmetricKey, nonce: &[u8; NONCE_LEN], plaintext: &[u8]) -> Vec<u8> {
        Aes128Gcm::new(key.as_bytes().into())
            .encrypt(Nonce::from_slice(nonce), plaintext)
            .expect("AES-GCM encryption of a short message cannot fail")
    }

    fn open(&self, key: &SymmetricKey, nonce: &[u8; NONCE_LEN], ciphertext: &[u8]) -> Result<Vec<u8>> {
        Aes128Gcm::new(key.as_bytes().into())
            .decrypt(Nonce::from_slice(nonce), ciphertext)
            .map_err(|_| Error::Authentication)
    }
}

/// SHA-256 counter-mode keystream with an HMAC-SHA256 tag. Deterministic and
/// dependency-light; meant for tests and reproducible transcripts.
pub struct KeyedStreamCipher;

impl KeyedStreamCipher {
    fn keystream_xor(key: &SymmetricKey, nonce: &[u8; NONCE_LEN], data: &mut [u8]) {
        for (block, chunk) in data.chunks_mut(32).enumerate() {
            let pad = Sha256::new()
                .chain_update(key.as_bytes())
                .chain_update(nonce)
                .chain_update((block as u32).to_be_bytes())
                .finalize();
            for (b, p) in chunk.iter_mut().zip(pad.iter()) {
                *b ^= p;
            }
        }
    }

    fn tag(key: &SymmetricKey, nonce: &[u8; NONCE_LEN], body: &[u8]) -> [u8; TAG_LEN] {
        let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(key.as_bytes()).expect("any key length");
        mac.update(nonce);
        mac.update(body);
        let full = mac.finalize().into_bytes();
        full[..TAG_LEN].try_into().expect("16 bytes")
    }
}

impl SymmetricCipher for KeyedStreamCipher {
    fn name(&self) -> &'static str {
        KEYED_STREAM
    }

    fn seal(&self, key: &SymmetricKey, nonce: &[u8; NONCE_LEN], plaintext: &[u8]) -> Vec<u8> {
        let mut body = plaintext.to_vec();
        Self::keystream_xor(key, nonce, &mut body);
        let tag = Self::tag(key, nonce, &body);
        body.extend_from_slice(&tag);
        body
    }

    fn open(&self, key: &SymmetricKey, nonce: &[u8; NONCE_LEN], ciphertext: &[u8]) -> Result<Vec<u8>> {
        if ciphertext.len() < TAG_LEN {
            return Err(Error::Authentication);
        }
        let (body, tag) = ciphertext.split_at(ciphertext.len() - TAG_LEN);
        let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(key.as_bytes()).expect("any key length");
        mac.update(nonce);
        mac.update(body);
        mac.verify_truncated_left(tag).map_err(|_| Error::Authentication)?;
        let mut plain = body.to_vec();
        Self::keystream_xor(key, nonce, &mut plain);
        Ok(plain)
    }
}

/// Ciphers selectable by name.
pub struct CipherRegistry {
    ciphers: BTreeMap<&'static str, Arc<dyn SymmetricCipher>>,
}

impl CipherRegistry {
    pub fn empty() -> Self {
        Self { ciphers: BTreeMap::new() }
    }

    pub fn register(&mut self, cipher: Arc<dyn SymmetricCipher>) {
        self.ciphers.insert(cipher.name(), cipher);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SymmetricCipher>> {
        self.ciphers
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Config(format!("unknown cipher {name:?}; known: {:?}", self.names())))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.ciphers.keys().copied().collect()
    }
}

impl Default for CipherRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(AesGcmCipher));
        r.register(Arc::new(KeyedStreamCipher));
        r
    }
}

/// A sealed challenge on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SealedBox {
    #[serde(with = "hex_bytes")]
    pub nonce: Vec<u8>,
    #[serde(with = "hex_bytes")]
    pub ciphertext: Vec<u8>,
}

mod hex_bytes {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        hex::decode(String::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// One direction of a DC↔sensor channel: a key plus the cipher in use.
#[derive(Clone)]
pub struct SymmetricChannel {
    key: SymmetricKey,
    cipher: Arc<dyn SymmetricCipher>,
}

impl fmt::Debug for SymmetricChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricChannel").field("cipher", &self.cipher.name()).finish()
    }
}

impl SymmetricChannel {
    pub fn new(key: SymmetricKey, cipher: Arc<dyn SymmetricCipher>) -> Self {
        Self { key, cipher }
    }

    pub fn key(&self) -> &SymmetricKey {
        &self.key
    }

    /// Seals the canonical JSON of `lambda` under the nonce for `round`.
    pub fn seal_lambda(&self, round: u64, lambda: &GaussianInt) -> SealedBox {
        let nonce = round_nonce(round);
        let plain = serde_json::to_vec(lambda).expect("GaussianInt serializes");
        SealedBox {
            nonce: nonce.to_vec(),
            ciphertext: self.cipher.seal(&self.key, &nonce, &plain),
        }
    }

    /// Opens a sealed challenge, insisting on this round's nonce so that a
    /// challenge from another round fails authentication.
    pub fn open_lambda(&self, round: u64, sealed: &SealedBox) -> Result<GaussianInt> {
        let nonce = round_nonce(round);
        if sealed.nonce != nonce {
            return Err(Error::Authentication);
        }
        let plain = self.cipher.open(&self.key, &nonce, &sealed.ciphertext)?;
        serde_json::from_slice(&plain).map_err(|_| Error::Authentication)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn channels() -> Vec<SymmetricChannel> {
        let reg = CipherRegistry::default();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        reg.names()
            .into_iter()
            .map(|n| SymmetricChannel::new(SymmetricKey::random(&mut rng), reg.get(n).unwrap()))
            .collect()
    }

    #[test]
    fn seal_open_round_trip() {
        let lambda = GaussianInt::new(-123456789, 42);
        for ch in channels() {
            let sealed = ch.seal_lambda(7, &lambda);
            assert_eq!(ch.open_lambda(7, &sealed).unwrap(), lambda);
        }
    }

    #[test]
    fn tampering_wrong_round_and_wrong_key_fail() {
        let lambda = GaussianInt::new(3, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for ch in channels() {
            let sealed = ch.seal_lambda(2, &lambda);
            for i in 0..sealed.ciphertext.len() {
                let mut bad = sealed.clone();
                bad.ciphertext[i] ^= 0x01;
                assert_eq!(ch.open_lambda(2, &bad), Err(Error::Authentication));
            }
            assert_eq!(ch.open_lambda(3, &sealed), Err(Error::Authentication));
            let mut renonced = sealed.clone();
            renonced.nonce = round_nonce(3).to_vec();
            assert_eq!(ch.open_lambda(3, &renonced), Err(Error::Authentication));
            let other = SymmetricChannel::new(SymmetricKey::random(&mut rng), ch.cipher.clone());
            assert_eq!(other.open_lambda(2, &sealed), Err(Error::Authentication));
        }
    }

    #[test]
    fn sealing_is_deterministic_per_round() {
        for ch in channels() {
            let l = GaussianInt::new(5, -9);
            assert_eq!(ch.seal_lambda(1, &l), ch.seal_lambda(1, &l));
            assert_ne!(ch.seal_lambda(1, &l), ch.seal_lambda(2, &l));
        }
    }

    #[test]
    fn key_chunks_round_trip_for_small_and_large_moduli() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let key = SymmetricKey::random(&mut rng);
        for n in [BigUint::from(35u32), BigUint::from(2u32), BigUint::from(1u32) << 600] {
            let chunks = key.to_chunks(&n).unwrap();
            assert!(chunks.iter().all(|c| c < &n));
            assert_eq!(SymmetricKey::from_chunks(&chunks, &n).unwrap(), key);
        }
        assert_eq!(key.to_chunks(&(BigUint::from(1u32) << 600)).unwrap().len(), 1);
        assert_eq!(key.to_chunks(&BigUint::from(2u32)).unwrap().len(), 128);
        assert!(key.to_chunks(&BigUint::from(1u32)).is_err());
        let n = BigUint::from(35u32);
        assert!(SymmetricKey::from_chunks(&[BigUint::from(35u32)], &n).is_err());
    }

    #[test]
    fn unknown_cipher_is_config_error() {
        assert!(matches!(CipherRegistry::default().get("rot13"), Err(Error::Config(_))));
    }
}
