use serde::{Deserialize, Serialize};

/// Cost of one complex modular exponentiation in integer modular
/// exponentiations: a complex multiplication costs four integer ones.
pub const COMPLEX_TO_INT_FACTOR: u64 = 4;

/// Per-party accumulator of the dominant operations priced by the protocol
/// cost model. Counters are owned by the caller, never global.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    /// Exponentiations in Z[i]*_p.
    pub complex_modexp: u64,
    /// Integer exponentiations mod p (including norm inversions).
    pub int_modexp: u64,
    /// Integer exponentiations mod n² (Paillier).
    pub modexp_n2: u64,
}

impl OpCounts {
    pub fn equivalent_int_modexp(&self) -> u64 {
        COMPLEX_TO_INT_FACTOR * self.complex_modexp + self.int_modexp
    }

    pub fn merge(&mut self, other: &OpCounts) {
        self.complex_modexp += other.complex_modexp;
        self.int_modexp += other.int_modexp;
        self.modexp_n2 += other.modexp_n2;
    }
}
