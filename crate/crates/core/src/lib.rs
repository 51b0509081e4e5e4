//! Reversible watermarking in the Gaussian integers combined with partially
//! homomorphic encryption (ElGamal over Z[i]*_p and component-wise Paillier),
//! plus deterministic simulations of the joint watermarking and encryption
//! protocols built on them.

pub mod codec;
pub mod counters;
pub mod elgamal;
pub mod error;
pub mod gaussian;
pub mod modring;
pub mod paillier;
pub mod primes;
pub mod protocols;
pub mod rdh;

pub use counters::OpCounts;
pub use error::{Error, Result};
pub use gaussian::{GaussianInt, GaussianRational};
pub use modring::GModRing;
