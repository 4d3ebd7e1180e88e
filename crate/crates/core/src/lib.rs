//! Exact 2-adic engine for higher Hilbert symbols on cyclotomic layers.
//!
//! For an unramified extension K of Q_2 of degree d and a level n >= 2, let
//! K_n = K(mu_{2^n}). Principal units x, y of K_n pair to a class
//! [x, y] in Z/2^n via the 2^n-th power norm residue symbol. This crate
//! computes that pairing exactly, by evaluating an explicit residue formula
//! on a two-variable completed group ring: units are lifted to power series
//! over the Witt coefficient ring W(F_{2^d})/2^M, pushed through the
//! operators phi (Frobenius), gamma (a cyclotomic twist), and a logarithmic
//! derivative, and the symbol is read off as a trace of a residue.
//!
//! Everything is computed over Z/2^M with explicit precision bookkeeping:
//! each series and scalar carries the number of certified mantissa bits, and
//! public results state the modulus they are certified at. There is no
//! floating point and no randomized arithmetic anywhere in the core path.
//!
//! Module layout:
//! - `coeff`: the coefficient ring W(F_{2^d})/2^M with Frobenius, trace,
//!   and Teichmuller lifts.
//! - `series`: windowed Laurent series over the coefficient ring and the
//!   operator calculus (phi, gamma, derivation, logarithms, residue).
//! - `knfield`: the cyclotomic layer K_n as an explicit ramified extension,
//!   with unit lifting, logarithm, trace, and Galois action.
//! - `symbol`: the pairing engine: the main residue formula, an independent
//!   cup-product route, and the Artin-Hasse special case, each emitting a
//!   certificate of the precision actually achieved.
//! - `oracle`: self-contained cross-checks (a quadratic-form symbol oracle
//!   and the shared acceptance harness).
pub mod coeff;
pub mod error;
pub mod knfield;
pub mod oracle;
pub mod series;
pub mod symbol;
#[cfg(test)]
pub(crate) mod testutil;
pub(crate) mod zarith;

pub use coeff::{CoeffCtx, CoeffElem};
pub use error::Error;
pub use knfield::{KnCtx, KnElem, ScaledKn};
pub use oracle::QuadOracleCtx;
pub use series::{ResidueValue, Series, SeriesCtx};
pub use symbol::{
    chi_unit_factor, Certificate, Engine, Params, PreparedUnit, ScaledScalar, SymbolValue,
    TwistedClass,
};
