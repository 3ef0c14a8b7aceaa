//! Tolerances shared by the library checks, the CLI `verify` command and the
//! acceptance suite. Everything that decides pass/fail reads from here.

/// A coefficient whose largest entry is below this is treated as zero when
/// trimming the support of a symbol.
pub const TRIM: f64 = 1e-14;

/// Entrywise tolerance for symbol equality.
pub const SYMBOL_EQ: f64 = 1e-12;

/// Accepted residual of a right division `L = R·H`.
pub const DIVISION: f64 = 1e-10;

/// Largest accepted condition number of the local interpolation system.
pub const MAX_CONDITION: f64 = 1e12;

/// Below this frequency the cancellation operator is the Taylor operator.
pub const TAYLOR_CUTOFF: f64 = 1e-8;

/// Biorthogonality identities evaluated on the unit circle.
pub const BIORTHOGONALITY: f64 = 1e-12;

/// Interpolatory identity `A(z) + A(-z) = 2D`.
pub const INTERPOLATORY: f64 = 1e-12;

/// Reproduction of exact samples by the subdivision operator.
pub const SPECTRAL: f64 = 1e-9;

/// Detail coefficients of exactly reproduced data.
pub const VANISHING_MOMENT: f64 = 1e-10;

/// Defining eigenvector condition of the cancellation operator.
pub const EIGVEC: f64 = 1e-12;

/// Two-level identity of the cancellation operator.
pub const TWO_LEVEL: f64 = 1e-12;

/// Factorization residuals for R and S.
pub const FACTORIZATION: f64 = 1e-10;

/// Agreement of the small-frequency quotients with the stationary ones.
pub const STATIONARY_QUOTIENT: f64 = 1e-8;

/// Analysis followed by synthesis.
pub const PERFECT_RECONSTRUCTION: f64 = 1e-10;

/// Distance between the cancellation operator at level 20 and the Taylor operator.
pub const TAYLOR_LIMIT: f64 = 1e-6;

/// Cascade rendering against a closed form.
pub const CASCADE: f64 = 1e-8;

/// Refinement equation of the basic limit functions.
pub const REFINEMENT: f64 = 1e-9;

/// Number of unit-circle samples for symbol identities.
pub const CIRCLE_SAMPLES: usize = 64;
