//! Independent brute-force verifiers: the classical quadratic Hilbert
//! symbol over Q_2(i) by exhaustive isotropy search in a finite quotient
//! ring, and the randomized property harness shared by the self-check
//! command and the acceptance suite.
//!
//! The quadratic oracle deliberately shares no series code with the main
//! pipeline: it works in plain machine words on the ring O/pie^m, where
//! O = Z_2[pie] with pie^2 = -2 - 2 pie. The bridge to the engine is the
//! parity of the mod-4 symbol: its 2^(n-1)-th power collapses the 2^n-th
//! symbol to the quadratic one, so (-1)^value must equal the search verdict.

pub mod harness;

use crate::error::Error;
use crate::knfield::{KnCtx, KnElem};
use crate::symbol::SymbolValue;

/// Exhaustive-search context on O/pie^m for K_2 = Q_2(i): elements are
/// coordinate pairs (c0, c1) mod 2^(m/2) for c0 + c1 pie.
pub struct QuadOracleCtx {
    kn: KnCtx,
    m: u32,
    h: u32,
}

/// Default search modulus exponent: the quadratic-form Hensel bound
/// 2 * v(2) * 2 + 2 with v(2) = 2, so primitive solutions mod pie^10 lift.
pub const DEFAULT_SEARCH_MODULUS: u32 = 10;

impl QuadOracleCtx {
    /// A search context over the given layer, which must be the d = 1,
    /// n = 2 configuration; m is the pie-power search modulus (even, at
    /// least the Hensel bound, and within the layer's precision).
    pub fn new(kn: &KnCtx, m: u32) -> Result<QuadOracleCtx, Error> {
        if kn.coeff().degree() != 1 || kn.level() != 2 {
            return Err(Error::Config(
                "quadratic oracle requires the d = 1, n = 2 layer".into(),
            ));
        }
        if m < DEFAULT_SEARCH_MODULUS || m % 2 != 0 {
            return Err(Error::Config(format!(
                "search modulus {m} must be even and at least {DEFAULT_SEARCH_MODULUS}"
            )));
        }
        let h = m / 2;
        if h > kn.coeff().precision() || m > 26 {
            return Err(Error::Config(format!(
                "search modulus {m} out of range for this layer"
            )));
        }
        Ok(QuadOracleCtx {
            kn: kn.clone(),
            m,
            h,
        })
    }

    pub fn default_for(kn: &KnCtx) -> Result<QuadOracleCtx, Error> {
        QuadOracleCtx::new(kn, DEFAULT_SEARCH_MODULUS)
    }

    pub fn search_modulus(&self) -> u32 {
        self.m
    }

    fn mask(&self) -> u64 {
        (1u64 << self.h) - 1
    }

    /// Reduce a layer element to its (c0, c1) coordinates mod 2^h.
    fn coords_of(&self, x: &KnElem) -> (u64, u64) {
        let c = self.kn.coeff();
        let low = |j: usize| c.low_bits(&self.kn.coord(x, j), self.h);
        (low(0), low(1))
    }

    /// Product in O/pie^m from pie^2 = -2 - 2 pie, all mod 2^h.
    fn qmul(&self, a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
        let mask = self.mask();
        let cross = a.1.wrapping_mul(b.1) << 1;
        let c0 = a.0.wrapping_mul(b.0).wrapping_sub(cross) & mask;
        let c1 = a
            .0
            .wrapping_mul(b.1)
            .wrapping_add(a.1.wrapping_mul(b.0))
            .wrapping_sub(cross)
            & mask;
        (c0, c1)
    }

    fn qadd(&self, a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
        let mask = self.mask();
        (
            a.0.wrapping_add(b.0) & mask,
            a.1.wrapping_add(b.1) & mask,
        )
    }

    fn index(&self, a: (u64, u64)) -> usize {
        ((a.0 << self.h) | a.1) as usize
    }

    /// The classical quadratic Hilbert symbol (x, y): +1 iff the form
    /// z^2 - x a^2 - y b^2 has a primitive zero mod pie^m (at least one of
    /// z, a, b a unit), which at this modulus is equivalent to isotropy
    /// over Q_2(i) by Hensel lifting. Exhaustive over all 2^m elements.
    pub fn quad_symbol(&self, x: &KnElem, y: &KnElem) -> Result<i32, Error> {
        for v in [x, y] {
            if !self.kn.is_unit(v) {
                return Err(Error::NotUnit);
            }
        }
        let xq = self.coords_of(x);
        let yq = self.coords_of(y);
        let count = 1usize << self.m;
        // square tables: bit 0 marks a square of anything, bit 1 a square
        // of a unit (unit iff c0 is odd)
        let mut squares = vec![0u8; count];
        for z0 in 0..=self.mask() {
            for z1 in 0..=self.mask() {
                let sq = self.qmul((z0, z1), (z0, z1));
                squares[self.index(sq)] |= if z0 & 1 == 1 { 3 } else { 1 };
            }
        }
        for a0 in 0..=self.mask() {
            for a1 in 0..=self.mask() {
                let a_unit = a0 & 1 == 1;
                let xa2 = self.qmul(xq, self.qmul((a0, a1), (a0, a1)));
                for b0 in 0..=self.mask() {
                    for b1 in 0..=self.mask() {
                        let v = self.qadd(xa2, self.qmul(yq, self.qmul((b0, b1), (b0, b1))));
                        let tag = squares[self.index(v)];
                        // primitivity: a or b a unit admits any square root;
                        // otherwise the root itself must be a unit
                        if tag & 1 == 1 && (a_unit || b0 & 1 == 1) || tag & 2 == 2 {
                            return Ok(1);
                        }
                    }
                }
            }
        }
        Ok(-1)
    }

    /// True iff the engine symbol's parity matches the quadratic oracle:
    /// (-1)^value = quad_symbol(x, y).
    pub fn parity_check(&self, x: &KnElem, y: &KnElem, s: &SymbolValue) -> Result<bool, Error> {
        let sign = if s.value % 2 == 0 { 1 } else { -1 };
        Ok(sign == self.quad_symbol(x, y)?)
    }
}
