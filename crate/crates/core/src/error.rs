//! Error type shared by all modules.

use thiserror::Error;

/// Failure modes of the engine.
///
/// Mixing elements across distinct contexts is a programmer error and
/// panics; everything that can fail on legitimate mathematical input is
/// reported through this enum.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Configuration outside the supported desk-scale bounds.
    #[error("unsupported configuration: {0}")]
    Config(String),

    /// Inversion of a non-unit in the coefficient ring or in K_n.
    #[error("not invertible")]
    NotInvertible,

    /// Series inversion of an element that is 0 modulo 2.
    #[error("not a unit in the series ring")]
    NotUnit,

    /// An operation required a principal unit of K_n.
    #[error("not a principal unit (valuation {valuation})")]
    NotPrincipalUnit {
        /// Diagnostic valuation: for a non-unit x, the pi-bar-adic
        /// valuation of x itself (-1 encodes an exact zero); for a
        /// unit not congruent to 1, the valuation of x - 1, which
        /// is 0.
        valuation: i64,
    },

    /// A product pushed a nonzero coefficient below the tracked window.
    #[error("window exhausted: increase the degree cap N")]
    WindowExhausted,

    /// The precision guard was consumed before the value was certified.
    #[error("guard exhausted: consumed {consumed} of {guard} guard bits")]
    GuardExhausted { consumed: u32, guard: u32 },

    /// A quantity that is integral by theorem failed to clear its
    /// denominator; signals insufficient guard precision (or a bug).
    #[error("integrality failure in {0}: insufficient guard precision")]
    Integrality(&'static str),

    /// A documented precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The two evaluation paths disagreed on the symbol value.
    #[error("path disagreement: main formula {main}, cup product {cup}")]
    PathDisagreement { main: u64, cup: u64 },

    /// Recomputation at a higher guard produced a different class.
    #[error("precision disagreement: {first} at guard {first_guard}, {second} at guard {second_guard}")]
    PrecisionDisagreement {
        first: u64,
        first_guard: u32,
        second: u64,
        second_guard: u32,
    },

    /// An internal invariant failed; always a bug, never bad input.
    #[error("internal error: {0}")]
    Internal(&'static str),
}
