//! Deterministic pseudo-random generation shared by the unit tests.

/// Minimal multiplicative congruential generator. The unit tests only need
/// reproducible bit soup, not statistical quality.
pub(crate) struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }
}
