//! Multi-party simulations of the joint watermarking and encryption
//! protocols, with the adversaries used to exercise their checks.

pub mod aggp;
pub mod attack;
pub mod challenge;
pub mod channel;
pub mod eg;
pub mod registry;
pub mod scenario;
pub mod schedule;
pub mod transcript;
pub mod tree;

pub use registry::{Protocol, ProtocolRegistry};
pub use scenario::{ScenarioConfig, SeedTree};
pub use transcript::{RoundTranscript, Simulation, Verdict};
